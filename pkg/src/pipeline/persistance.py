#!/usr/bin/env python3
"""
Module de persistance : jeu de données (JSON + lignes binaires), modèle
(en-tête JSON + tableaux binaires + somme SHA-256) et exports CSV.
Toutes les écritures passent par un fichier temporaire puis os.replace.
"""
import csv
import hashlib
import io
import json
import os
import struct
import tempfile

import numpy as np
from scipy import sparse

from src.erreurs import BundleCorrompu, FormatInvalide
from src.features.dictionnaireFeatures import FeatureDictionary, LabeledDataset
from src.graph.grapheAppels import ApiVocabulary, SequencesCandidates
from src.modele.arbreDecision import DecisionTree
from src.modele.clusteringDensite import WeightVector
from src.modele.ensembleAdaptatif import BoostedClassifier, EnsembleModel
from src.pipeline.configPipeline import depuis_dict
from src.pipeline.pipelineFamDroid import ModeleFamDroid

FORMAT_DATASET = "famdroid-dataset"
VERSION_DATASET = 2
MAGIC_LIGNES = b"FAMDROWS"
EXTENSION_LIGNES = ".lignes"

FORMAT_MODELE = "famdroid-modele"
VERSION_MODELE = 2
MAGIC_MODELE = b"FAMDROID-MODELE\n"
TAILLE_SOMME = 32


def ecrire_atomique(fichier, donnees):
    """Écrit des octets dans un temporaire du même dossier puis le renomme."""
    dossier = os.path.dirname(os.path.abspath(fichier))
    os.makedirs(dossier, exist_ok=True)
    descripteur, temporaire = tempfile.mkstemp(dir=dossier, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(descripteur, "wb") as f:
            f.write(donnees)
        os.replace(temporaire, fichier)
    except BaseException:
        if os.path.exists(temporaire):
            os.remove(temporaire)
        raise


def json_deterministe(data):
    return json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def _csv_en_octets(entete, lignes):
    tampon = io.StringIO(newline="")
    writer = csv.writer(tampon, lineterminator="\n")
    writer.writerow(entete)
    writer.writerows(lignes)
    return tampon.getvalue().encode("utf-8")


def ecrire_csv(fichier, entete, lignes):
    ecrire_atomique(fichier, _csv_en_octets(entete, lignes))


# --- Jeu de données ---------------------------------------------------------

def chemin_lignes(fichier_json):
    base, _ = os.path.splitext(fichier_json)
    return base + EXTENSION_LIGNES


def _encoder_lignes(dataset):
    position = {f: i for i, f in enumerate(dataset.families)}
    morceaux = [MAGIC_LIGNES, struct.pack("<II", VERSION_DATASET, len(dataset))]
    for i, app_id in enumerate(dataset.ids):
        identifiant = app_id.encode("utf-8")
        label = dataset.labels[i]
        colonnes = dataset.vecteur(i).columns.astype("<u4")
        morceaux.append(struct.pack("<I", len(identifiant)))
        morceaux.append(identifiant)
        morceaux.append(struct.pack("<iI", position[label] if label is not None else -1,
                                    colonnes.size))
        morceaux.append(colonnes.tobytes())
        if dataset.appels is not None:
            methodes = dataset.appels.sequences[i]
            morceaux.append(struct.pack("<I", len(methodes)))
            for sequence in methodes:
                morceaux.append(struct.pack("<I", len(sequence)))
                morceaux.append(np.asarray(sequence, dtype="<u4").tobytes())
    return b"".join(morceaux)


def _decoder_lignes(octets, dimension, n_candidats=None):
    if octets[:len(MAGIC_LIGNES)] != MAGIC_LIGNES:
        raise FormatInvalide("fichier de lignes : signature absente")
    curseur = len(MAGIC_LIGNES)
    try:
        version, n = struct.unpack_from("<II", octets, curseur)
        curseur += 8
        if version != VERSION_DATASET:
            raise FormatInvalide(f"fichier de lignes : version {version} non prise en charge")
        ids, labels, indptr, indices, sequences = [], [], [0], [], []
        for _ in range(n):
            (longueur,) = struct.unpack_from("<I", octets, curseur)
            curseur += 4
            ids.append(octets[curseur:curseur + longueur].decode("utf-8"))
            curseur += longueur
            famille, nb = struct.unpack_from("<iI", octets, curseur)
            curseur += 8
            colonnes = np.frombuffer(octets, dtype="<u4", count=nb, offset=curseur)
            curseur += 4 * nb
            labels.append(famille)
            indices.extend(colonnes.tolist())
            indptr.append(len(indices))
            if n_candidats is not None:
                (nb_methodes,) = struct.unpack_from("<I", octets, curseur)
                curseur += 4
                methodes = []
                for _ in range(nb_methodes):
                    (longueur,) = struct.unpack_from("<I", octets, curseur)
                    curseur += 4
                    appels = np.frombuffer(octets, dtype="<u4", count=longueur, offset=curseur)
                    curseur += 4 * longueur
                    if appels.size and int(appels.max()) >= n_candidats:
                        raise FormatInvalide("fichier de lignes : API hors des candidates")
                    methodes.append(tuple(appels.tolist()))
                sequences.append(tuple(methodes))
    except (struct.error, ValueError, UnicodeDecodeError) as e:
        raise FormatInvalide(f"fichier de lignes tronqué ou illisible : {e}") from e
    if curseur != len(octets):
        raise FormatInvalide("fichier de lignes : octets en trop")
    if indices and max(indices) >= dimension:
        raise FormatInvalide("fichier de lignes : colonne hors du dictionnaire")
    return ids, labels, indptr, indices, sequences


def sauvegarder_dataset(dataset, fichier, prefixes=()):
    """Écrit <nom>.json (métadonnées) et <nom>.lignes (lignes binaires)."""
    lignes = chemin_lignes(fichier)
    entete = {
        "format": FORMAT_DATASET,
        "version": VERSION_DATASET,
        "tokens": dataset.dictionary.tokens,
        "kinds": dataset.dictionary.kinds,
        "families": list(dataset.families),
        "vocabulary": list(dataset.vocabulary.apis) if dataset.vocabulary else None,
        "prefixes": list(prefixes),
        "candidats": list(dataset.appels.candidats) if dataset.appels is not None else None,
        "lignes": os.path.basename(lignes),
        "n_rows": len(dataset),
    }
    ecrire_atomique(lignes, _encoder_lignes(dataset))
    ecrire_atomique(fichier, json_deterministe(entete).encode("utf-8"))
    return lignes


def charger_dataset(fichier):
    try:
        with open(fichier, "r", encoding="utf-8") as f:
            entete = json.load(f)
    except FileNotFoundError:
        raise FormatInvalide(f"jeu de données '{fichier}' introuvable") from None
    except json.JSONDecodeError as e:
        raise FormatInvalide(f"jeu de données illisible : {e}") from e
    if entete.get("format") != FORMAT_DATASET or entete.get("version") != VERSION_DATASET:
        raise FormatInvalide(f"'{fichier}' n'est pas un jeu de données FamDroid v{VERSION_DATASET}")

    dictionnaire = FeatureDictionary(entries=tuple(zip(entete["tokens"], entete["kinds"])))
    chemin = os.path.join(os.path.dirname(os.path.abspath(fichier)), entete["lignes"])
    try:
        with open(chemin, "rb") as f:
            octets = f.read()
    except FileNotFoundError:
        raise FormatInvalide(f"fichier de lignes '{chemin}' introuvable") from None
    candidats = entete.get("candidats")
    ids, codes, indptr, indices, sequences = _decoder_lignes(
        octets, len(dictionnaire), len(candidats) if candidats is not None else None)
    familles = entete["families"]
    labels = [familles[c] if c >= 0 else None for c in codes]
    matrice = sparse.csr_matrix(
        (np.ones(len(indices), dtype=np.int8), np.array(indices, dtype=np.int64),
         np.array(indptr, dtype=np.int64)),
        shape=(len(ids), len(dictionnaire)),
    )
    vocabulaire = entete.get("vocabulary")
    appels = SequencesCandidates(tuple(candidats), tuple(sequences)) if candidats is not None else None
    return LabeledDataset(
        dictionnaire, ids, matrice, labels, families=familles,
        vocabulary=ApiVocabulary(apis=tuple(vocabulaire)) if vocabulaire is not None else None,
        appels=appels,
    )


# --- Modèle -----------------------------------------------------------------

class _Tableaux:
    """Accumule des tableaux numpy dans une section binaire, avec leurs descripteurs."""

    def __init__(self):
        self.morceaux = []
        self.taille = 0

    def ajouter(self, tableau):
        tableau = np.ascontiguousarray(tableau)
        tableau = tableau.astype(tableau.dtype.newbyteorder("<"), copy=False)
        descripteur = {"offset": self.taille, "dtype": tableau.dtype.str,
                       "shape": list(tableau.shape)}
        octets = tableau.tobytes()
        self.morceaux.append(octets)
        self.taille += len(octets)
        return descripteur

    def octets(self):
        return b"".join(self.morceaux)


def _lire_tableau(binaire, descripteur):
    dtype = np.dtype(descripteur["dtype"])
    forme = tuple(descripteur["shape"])
    nombre = int(np.prod(forme)) if forme else 1
    if nombre == 0:
        return np.zeros(forme, dtype=dtype)
    try:
        tableau = np.frombuffer(binaire, dtype=dtype, count=nombre, offset=descripteur["offset"])
    except ValueError as e:
        raise BundleCorrompu(f"tableau hors de la section binaire : {e}") from e
    return tableau.reshape(forme).copy()


def encoder_modele(modele):
    tableaux = _Tableaux()
    ensemble = modele.ensemble
    classifieurs = []
    for classifieur in ensemble.classifiers:
        tours = []
        for arbre, alpha in classifieur.rounds:
            tours.append({
                "alpha": alpha,
                "max_depth": arbre.max_depth,
                "tableaux": {nom: tableaux.ajouter(t) for nom, t in arbre.en_tableaux().items()},
            })
        classifieurs.append({
            "families": list(classifieur.families),
            "prior": tableaux.ajouter(classifieur.prior.astype("<f8")),
            "rejet": classifieur.rejet,
            "rounds": tours,
        })
    entete = {
        "format": FORMAT_MODELE,
        "version": VERSION_MODELE,
        "config": modele.config.en_dict(),
        "dictionary": {"tokens": modele.dictionary.tokens, "kinds": modele.dictionary.kinds},
        "vocabulary": list(modele.vocabulary.apis) if modele.vocabulary else None,
        "families": list(ensemble.families),
        "k": ensemble.k,
        "weights": tableaux.ajouter(ensemble.weights.w.astype("<f8")),
        "centers": tableaux.ajouter(ensemble.centers.astype("<f8")),
        "importances": tableaux.ajouter(np.asarray(modele.importances, dtype="<f8")),
        "classifiers": classifieurs,
    }
    octets_entete = json.dumps(entete, ensure_ascii=False, sort_keys=True).encode("utf-8")
    binaire = tableaux.octets()
    somme = hashlib.sha256(octets_entete + binaire).digest()
    return b"".join([MAGIC_MODELE, struct.pack("<Q", len(octets_entete)), octets_entete,
                     binaire, somme])


def decoder_modele(octets):
    if not octets.startswith(MAGIC_MODELE):
        raise BundleCorrompu("signature de modèle absente")
    debut = len(MAGIC_MODELE)
    if len(octets) < debut + 8 + TAILLE_SOMME:
        raise BundleCorrompu("modèle tronqué")
    (longueur,) = struct.unpack_from("<Q", octets, debut)
    debut += 8
    contenu = octets[debut:-TAILLE_SOMME]
    if longueur > len(contenu):
        raise BundleCorrompu("en-tête de modèle tronqué")
    if hashlib.sha256(contenu).digest() != octets[-TAILLE_SOMME:]:
        raise BundleCorrompu("somme de contrôle du modèle invalide")
    try:
        entete = json.loads(contenu[:longueur].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise BundleCorrompu(f"en-tête de modèle illisible : {e}") from e
    if entete.get("format") != FORMAT_MODELE or entete.get("version") != VERSION_MODELE:
        raise BundleCorrompu(f"format de modèle non pris en charge : {entete.get('version')}")
    binaire = contenu[longueur:]

    classifieurs = []
    for c in entete["classifiers"]:
        tours = tuple(
            (DecisionTree.depuis_tableaux(
                {nom: _lire_tableau(binaire, d) for nom, d in t["tableaux"].items()},
                t["max_depth"]), float(t["alpha"]))
            for t in c["rounds"]
        )
        classifieurs.append(BoostedClassifier(
            rounds=tours,
            families=tuple(c["families"]),
            prior=_lire_tableau(binaire, c["prior"]),
            rejet=bool(c["rejet"]),
        ))
    ensemble = EnsembleModel(
        k=int(entete["k"]),
        centers=_lire_tableau(binaire, entete["centers"]),
        weights=WeightVector(w=_lire_tableau(binaire, entete["weights"])),
        classifiers=tuple(classifieurs),
        families=tuple(entete["families"]),
    )
    dictionnaire = entete["dictionary"]
    vocabulaire = entete.get("vocabulary")
    return ModeleFamDroid(
        config=depuis_dict(entete["config"]),
        dictionary=FeatureDictionary(entries=tuple(zip(dictionnaire["tokens"], dictionnaire["kinds"]))),
        vocabulary=ApiVocabulary(apis=tuple(vocabulaire)) if vocabulaire is not None else None,
        ensemble=ensemble,
        importances=_lire_tableau(binaire, entete["importances"]),
    )


def sauvegarder_modele(modele, fichier):
    ecrire_atomique(fichier, encoder_modele(modele))


def charger_modele(fichier):
    try:
        with open(fichier, "rb") as f:
            octets = f.read()
    except FileNotFoundError:
        raise BundleCorrompu(f"modèle '{fichier}' introuvable") from None
    return decoder_modele(octets)


# --- Exports CSV ------------------------------------------------------------

def exporter_importances(fichier, dictionary, valeurs):
    ordre = sorted(range(len(dictionary)), key=lambda j: (-valeurs[j], dictionary.tokens[j]))
    ecrire_csv(fichier, ["token", "kind", "importance"],
               ([dictionary.tokens[j], dictionary.kinds[j], repr(float(valeurs[j]))] for j in ordre))


def exporter_clusters(fichier, ids, assignments, distances):
    ecrire_csv(fichier, ["sample_id", "cluster", "weighted_distance_to_center"],
               ([i, int(c), repr(float(d))] for i, c, d in zip(ids, assignments, distances)))


def exporter_predictions(fichier, ids, predites, scores, families):
    entete = ["sample_id", "predicted_family"] + [f"score_{f}" for f in families]
    ecrire_csv(fichier, entete,
               ([i, p] + [repr(float(s)) for s in ligne] for i, p, ligne in zip(ids, predites, scores)))


def exporter_confusion(fichier, confusion, families):
    ecrire_csv(fichier, ["true\\predicted"] + list(families),
               ([f] + [int(v) for v in ligne] for f, ligne in zip(families, confusion)))


def exporter_precision_familles(fichier, rapport):
    ecrire_csv(fichier, ["family", "accuracy", "support"],
               ([m.family, repr(float(m.recall)), m.support] for m in rapport.per_family))


def exporter_balayage(fichier, points):
    ecrire_csv(fichier, ["top_k", "accuracy", "macro_f1"],
               ([p["top_k"], repr(float(p["accuracy"])), repr(float(p["macro_f1"]))] for p in points))


def exporter_classement_api(fichier, classement):
    ecrire_csv(fichier, ["api", "score", "rank"],
               ([api, repr(float(score)), rang] for rang, (api, score) in enumerate(classement, 1)))


def ecrire_json(fichier, data):
    ecrire_atomique(fichier, json_deterministe(data).encode("utf-8"))
