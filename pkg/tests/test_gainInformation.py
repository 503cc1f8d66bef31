import math

import numpy as np
import pytest

from src.features.gainInformation import (
    candidats_api,
    classer_api,
    entropie_bits,
    gains_colonnes,
    information_gain,
    prefilter_api_vocabulary,
    un_parmi_k,
)
from tests.donneesTest import echantillon, jeu_binaire


def h2(p):
    return 0.0 if p in (0.0, 1.0) else -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def dix_apis():
    apis = [f"Landroid/Api{j};->f()V" for j in range(10)]
    samples = [
        echantillon("a", "A", sequences=[apis[:4]]),
        echantillon("b", "A", sequences=[apis[:3]]),
        echantillon("c", "B", sequences=[apis[3:]]),
        echantillon("d", "B", sequences=[apis[5:]]),
    ]
    return apis, samples


# --- Gain d'information -----------------------------------------------------

def test_colonne_constante():
    dataset = jeu_binaire([[1], [1], [1], [1]], ["A", "A", "B", "B"])
    assert information_gain(dataset, 0) == 0.0


def test_separation_parfaite():
    dataset = jeu_binaire([[1], [1], [0], [0]], ["A", "A", "B", "B"])
    assert information_gain(dataset, 0) == pytest.approx(1.0, abs=1e-12)


def test_six_echantillons_a_la_main():
    dataset = jeu_binaire([[1], [1], [0], [0], [0], [1]], ["A", "A", "A", "B", "B", "B"])
    attendu = 1.0 - (0.5 * h2(2 / 3) + 0.5 * h2(1 / 3))
    assert information_gain(dataset, 0) == pytest.approx(attendu, abs=1e-12)


def test_une_seule_famille():
    dataset = jeu_binaire([[1], [0]], ["A", "A"])
    assert information_gain(dataset, 0) == 0.0


def test_bornes():
    rng = np.random.default_rng(0)
    X = rng.random((60, 15)) < 0.4
    dataset = jeu_binaire(X, [f"F{i % 3}" for i in range(60)])
    for j in range(15):
        assert 0.0 <= information_gain(dataset, j) <= math.log2(3) + 1e-12


def test_entropie():
    assert float(entropie_bits([1, 1, 1, 1])) == pytest.approx(2.0, abs=1e-12)
    assert float(entropie_bits([0, 0])) == 0.0


def test_gains_finis_sous_poids_flottants():
    # comptes pondérés : total - comptes_1 peut tomber juste sous zéro
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(5, 60))
        y = rng.integers(0, 3, n)
        poids = rng.uniform(0.0, 1.0, n) ** 4
        poids /= poids.sum()
        X = np.column_stack([np.ones(n), rng.random(n) < 0.5]).astype(bool)
        gains = gains_colonnes(X, un_parmi_k(y, 3, poids))
        assert np.all(np.isfinite(gains))
        assert gains[0] <= 1e-12


# --- Classement et pré-filtrage ---------------------------------------------

def test_candidats_par_prefixe():
    sample = echantillon("a", sequences=[["Landroid/A;->x()V", "Lcom/perso/B;->y()V", "Ljava/C;->z()V"]])
    assert candidats_api([sample], ("Landroid/", "Ljava/")) == ["Landroid/A;->x()V", "Ljava/C;->z()V"]


def test_dix_candidats_tous_gardes():
    apis, samples = dix_apis()
    vocabulaire = prefilter_api_vocabulary(samples, apis, 10)
    assert len(vocabulaire) == 10
    assert set(vocabulaire.apis) == set(apis)
    # gain 1 bit pour les API 0-2 et 5-9, moins pour 3 et 4
    assert set(vocabulaire.apis[-2:]) == {apis[3], apis[4]}
    assert list(vocabulaire.apis[:8]) == sorted(apis[:3] + apis[5:])


def test_classement_scores_et_ordre():
    apis, samples = dix_apis()
    classement = classer_api(samples, apis)
    assert [api for api, _ in classement][:8] == sorted(apis[:3] + apis[5:])
    scores = [score for _, score in classement]
    assert scores[:8] == pytest.approx([1.0] * 8, abs=1e-12)
    assert scores == sorted(scores, reverse=True)
    assert prefilter_api_vocabulary(samples, apis, 3).apis == tuple(a for a, _ in classement[:3])


def test_api_plantees_retrouvees():
    rng = np.random.default_rng(11)
    plantees = [f"Landroid/signal/Famille{f};->appel()V" for f in range(5)]
    bruit = [f"Landroid/bruit/Api{j:02d};->appel()V" for j in range(50)]
    samples = []
    for i in range(50):
        famille = i % 5
        sequence = [plantees[famille]] + [b for b in bruit if rng.random() < 0.5]
        samples.append(echantillon(f"app{i:02d}", f"F{famille}", sequences=[sequence]))
    vocabulaire = prefilter_api_vocabulary(samples, candidats_api(samples), 5)
    assert set(vocabulaire.apis) == set(plantees)


def test_moins_de_candidats_que_demande(caplog):
    samples = [echantillon("a", "A", sequences=[["Landroid/X;->f()V"]]),
               echantillon("b", "B", sequences=[["Landroid/Y;->f()V"]])]
    vocabulaire = prefilter_api_vocabulary(samples, candidats_api(samples), 7000)
    assert len(vocabulaire) == 2
    assert any(r.name == "src.features.gainInformation" and r.levelname == "WARNING"
               for r in caplog.records)


def test_classement_par_foret():
    apis = ["Landroid/Signal;->f()V", "Landroid/Bruit;->f()V"]
    samples = [echantillon(f"s{i}", "A" if i % 2 else "B",
                           sequences=[[apis[0]] if i % 2 else []] + ([[apis[1]]] if i % 3 == 0 else []))
               for i in range(40)]
    vocabulaire = prefilter_api_vocabulary(samples, apis, 1, ranking="forest", seed=3, n_trees=20)
    assert vocabulaire.apis == (apis[0],)
