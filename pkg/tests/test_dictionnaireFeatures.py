import os

import numpy as np
import pytest

from src.data.generateurCorpus import FICHIER_ETIQUETTES, SyntheticSpec, generer_corpus
from src.data.ingestionCorpus import analyser_application, ingest_corpus
from src.erreurs import DimensionIncompatible, EtiquettesDegenerees
from src.features.dictionnaireFeatures import (
    FeatureDictionary,
    FeatureVector,
    LabeledDataset,
    build_dictionary,
    construire_dataset,
    type_jeton,
    vectorize,
)
from src.graph.grapheAppels import SequencesCandidates
from src.pipeline.configPipeline import PipelineConfig
from src.pipeline.pipelineFamDroid import construire_dataset_corpus
from tests.donneesTest import echantillon, jeu_binaire


@pytest.fixture
def petit_jeu():
    X = [[1, 0, 1], [0, 1, 0], [1, 1, 0], [0, 0, 1]]
    return jeu_binaire(X, ["B", "A", "B", None])


# --- Dictionnaire -----------------------------------------------------------

def test_permission_partagee_une_seule_fois():
    a = echantillon("a", permissions=["android.permission.INTERNET", "android.permission.SEND_SMS"])
    b = echantillon("b", permissions=["android.permission.INTERNET"])
    dictionnaire = build_dictionary([a, b], [None, None])
    assert dictionnaire.tokens == ["perm:android.permission.INTERNET",
                                   "perm:android.permission.SEND_SMS"]


def test_ensembles_disjoints():
    a = echantillon("a", permissions=["p1", "p2", "p3"])
    b = echantillon("b", permissions=["q1", "q2", "q3", "q4"])
    assert len(build_dictionary([a, b], [None, None])) == 7


def test_ordre_par_type_puis_jeton():
    dictionnaire = FeatureDictionary.depuis_tokens(
        ["perm:b", "apirel:x->y", "service:s", "hw:h", "perm:a", "intent:i"])
    assert dictionnaire.kinds == ["apirel", "comp", "hw", "intent", "perm", "perm"]
    assert dictionnaire.tokens[-2:] == ["perm:a", "perm:b"]
    assert dictionnaire.comptes_par_type() == {"perm": 2, "hw": 1, "comp": 1, "intent": 1, "apirel": 1}


def test_type_inconnu():
    assert type_jeton("provider:x") == "comp"
    with pytest.raises(ValueError):
        type_jeton("inconnu:x")


def test_univers_du_generateur(tmp_path):
    cible = tmp_path / "corpus"
    resultat = generer_corpus(SyntheticSpec.uniforme(4, 50, seed=5), str(cible))
    echantillons = ingest_corpus(str(cible), str(cible / FICHIER_ETIQUETTES))
    dataset = construire_dataset_corpus(echantillons, PipelineConfig(api_vocab_size=100000))
    assert sorted(dataset.dictionary.tokens) == resultat.univers()
    for i, app_id in enumerate(dataset.ids):
        colonnes = dataset.vecteur(i).columns
        assert sorted(dataset.dictionary.tokens[c] for c in colonnes) == list(resultat.tokens_attendus[app_id])


def test_sequences_candidates_conservees():
    samples = [
        echantillon("a", "F1", sequences=[["Landroid/A;->x()V", "Lcom/perso;->y()V", "Landroid/B;->z()V"]]),
        echantillon("b", "F2", sequences=[["Lcom/perso;->y()V"], ["Landroid/B;->z()V"]]),
    ]
    dataset = construire_dataset_corpus(samples, PipelineConfig(api_vocab_size=10))
    appels = dataset.appels
    assert appels.candidats == ("Landroid/A;->x()V", "Landroid/B;->z()V")
    assert appels.appels(0) == [("Landroid/A;->x()V", "Landroid/B;->z()V")]
    assert appels.appels(1) == [("Landroid/B;->z()V",)]
    assert dataset.sous_ensemble([1]).appels.sequences == (((1,),),)


# --- Vectorisation ----------------------------------------------------------

def test_colonnes_exactes():
    dictionnaire = FeatureDictionary.depuis_tokens([f"perm:p{j}" for j in range(8)])
    vecteur = vectorize(echantillon("a", permissions=["p0", "p5"]), None, dictionnaire)
    assert vecteur.columns.tolist() == [0, 5]
    assert vecteur.dimension == 8


def test_jetons_inconnus():
    dictionnaire = FeatureDictionary.depuis_tokens(["perm:p0"])
    vecteur = vectorize(echantillon("a", permissions=["autre"]), None, dictionnaire)
    assert vecteur.columns.size == 0


def test_fixture_onze_jetons(corpus_fixture):
    alpha = analyser_application(os.path.join(corpus_fixture, "app_alpha"))
    beta = analyser_application(os.path.join(corpus_fixture, "app_beta"))
    dictionnaire = build_dictionary([alpha, beta], [None, None])
    vecteur = vectorize(alpha, None, dictionnaire)
    attendus = {
        "perm:android.permission.INTERNET",
        "perm:android.permission.SEND_SMS",
        "perm:android.permission.READ_PHONE_STATE",
        "hw:android.hardware.telephony",
        "hw:android.hardware.camera",
        "activity:com.alpha.Principale",
        "service:com.alpha.ServiceSms",
        "receiver:com.alpha.Demarrage",
        "provider:com.alpha.Fournisseur",
        "intent:android.intent.action.MAIN",
        "intent:android.intent.action.BOOT_COMPLETED",
    }
    assert vecteur.columns.tolist() == sorted(dictionnaire.index[t] for t in attendus)


def test_colonne_hors_dimension():
    with pytest.raises(DimensionIncompatible):
        FeatureVector(columns=np.array([3]), dimension=3)


# --- LabeledDataset ---------------------------------------------------------

def test_familles_et_indices(petit_jeu):
    assert petit_jeu.families == ("A", "B")
    assert petit_jeu.y().tolist() == [1, 0, 1, -1]
    assert petit_jeu.vecteur(0).columns.tolist() == [0, 2]


def test_etiquettes_degenerees(petit_jeu):
    with pytest.raises(EtiquettesDegenerees):
        petit_jeu.verifier_etiquettes()
    with pytest.raises(EtiquettesDegenerees):
        jeu_binaire([[1], [0]], ["A", "A"]).verifier_etiquettes()


def test_aligner_abandonne_les_inconnus(petit_jeu):
    cible = FeatureDictionary.depuis_tokens(["perm:f002", "perm:nouveau"])
    aligne = petit_jeu.aligner(cible)
    assert aligne.dense().tolist() == [[True, False], [False, False], [False, False], [True, False]]


def test_restreindre_et_colonnes_observees(petit_jeu):
    reduit = petit_jeu.sous_ensemble([1, 2]).restreindre_colonnes([0, 1])
    assert reduit.dictionary.tokens == ["perm:f000", "perm:f001"]
    assert reduit.families == ("A", "B")
    assert petit_jeu.sous_ensemble([1]).colonnes_observees().tolist() == [1]


def test_support_minimal(petit_jeu, caplog):
    filtre, retirees = petit_jeu.filtrer_support_min(2)
    assert retirees == ["A"]
    assert filtre.labels == ("B", "B")
    assert any("Familles retirées" in r.getMessage() for r in caplog.records)


def test_sequences_de_longueur_incompatible():
    appels = SequencesCandidates(candidats=("Landroid/A;->x()V",), sequences=(((0,),),))
    with pytest.raises(DimensionIncompatible):
        LabeledDataset(FeatureDictionary.depuis_tokens(["perm:f000"]), ["a", "b"], np.eye(2, 1),
                       ["A", "B"], appels=appels)


def test_construire_dataset():
    samples = [echantillon("a", "F1", permissions=["x"]), echantillon("b", "F2", permissions=["y"])]
    dictionnaire = build_dictionary(samples, [None, None])
    dataset = construire_dataset(samples, [None, None], dictionnaire)
    assert dataset.ids == ("a", "b")
    assert dataset.dense().tolist() == [[True, False], [False, True]]
