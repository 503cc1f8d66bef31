#!/usr/bin/env python3
"""
Module du dictionnaire global de caractéristiques et de la vectorisation binaire
Chaque application devient un vecteur de 0/1 sur l'ensemble S de toutes les
caractéristiques observées (permissions, matériel, composants, intentions,
relations d'appel d'API)
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
from scipy import sparse

from src.data.parseurManifest import TYPES_COMPOSANTS
from src.erreurs import DimensionIncompatible, EtiquettesDegenerees
from src.graph.grapheAppels import pair_feature_tokens

logger = logging.getLogger(__name__)

TYPES = ("perm", "hw", "comp", "intent", "apirel")
_TYPE_PAR_PREFIXE = {"perm": "perm", "hw": "hw", "intent": "intent", "apirel": "apirel"}
_TYPE_PAR_PREFIXE.update({c: "comp" for c in TYPES_COMPOSANTS})


def type_jeton(token):
    """Type d'un jeton, déduit de son préfixe (perm:, hw:, service:, apirel:...)."""
    prefixe = token.split(":", 1)[0]
    try:
        return _TYPE_PAR_PREFIXE[prefixe]
    except KeyError:
        raise ValueError(f"préfixe de jeton inconnu : {token!r}") from None


@dataclass(frozen=True)
class FeatureDictionary:
    entries: Tuple[Tuple[str, str], ...]
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for colonne, (token, kind) in enumerate(self.entries):
            if token in index:
                raise ValueError(f"jeton en double : {token}")
            if type_jeton(token) != kind:
                raise ValueError(f"type {kind} incohérent pour {token}")
            index[token] = colonne
        object.__setattr__(self, "index", index)

    @classmethod
    def depuis_tokens(cls, tokens):
        """Dictionnaire trié par (type, jeton), sans doublons."""
        uniques = sorted({(type_jeton(t), t) for t in tokens})
        return cls(entries=tuple((t, k) for k, t in uniques))

    def __len__(self):
        return len(self.entries)

    @property
    def tokens(self):
        return [t for t, _ in self.entries]

    @property
    def kinds(self):
        return [k for _, k in self.entries]

    def sous_dictionnaire(self, colonnes):
        """Dictionnaire restreint aux colonnes données, ordre d'origine conservé."""
        return FeatureDictionary(entries=tuple(self.entries[c] for c in sorted(colonnes)))

    def comptes_par_type(self):
        comptes = Counter(self.kinds)
        return {k: comptes.get(k, 0) for k in TYPES}


@dataclass(frozen=True, eq=False)
class FeatureVector:
    columns: np.ndarray
    dimension: int

    def __post_init__(self):
        colonnes = np.unique(np.asarray(self.columns, dtype=np.int64))
        if colonnes.size and (colonnes[0] < 0 or colonnes[-1] >= self.dimension):
            raise DimensionIncompatible(
                f"colonne hors dimension {self.dimension} : {colonnes.tolist()}"
            )
        object.__setattr__(self, "columns", colonnes)

    def dense(self):
        x = np.zeros(self.dimension, dtype=bool)
        x[self.columns] = True
        return x

    def __eq__(self, autre):
        return (
            isinstance(autre, FeatureVector)
            and self.dimension == autre.dimension
            and np.array_equal(self.columns, autre.columns)
        )


def tokens_echantillon(sample, matrix):
    """Jetons présentés par un échantillon : manifeste + relations d'appel."""
    jetons = list(sample.manifest.tokens())
    if matrix is not None:
        jetons.extend(pair_feature_tokens(matrix))
    return jetons


def build_dictionary(samples, matrices):
    """Dictionnaire de tous les jetons vus dans au moins un échantillon."""
    tous = set()
    for sample, matrix in zip(samples, matrices):
        tous.update(tokens_echantillon(sample, matrix))
    dictionnaire = FeatureDictionary.depuis_tokens(tous)
    logger.info("Dictionnaire : %d caractéristiques %s", len(dictionnaire),
                dictionnaire.comptes_par_type())
    return dictionnaire


def vectorize(sample, matrix, dictionary):
    """Colonne j à 1 ssi l'échantillon présente le jeton j ; jetons inconnus ignorés."""
    index = dictionary.index
    colonnes = [index[t] for t in tokens_echantillon(sample, matrix) if t in index]
    return FeatureVector(columns=np.array(colonnes, dtype=np.int64), dimension=len(dictionary))


class LabeledDataset:
    """
    Jeu de données binaire : une ligne par application (identifiant, vecteur,
    famille). La matrice est stockée en CSR ; families est la liste triée des
    familles présentes (les lignes sans famille ont l'étiquette None).
    appels : séquences d'API candidates par ligne, quand le jeu vient d'un corpus.
    """

    def __init__(self, dictionary, ids, matrice, labels, families=None, vocabulary=None,
                 appels=None):
        matrice = sparse.csr_matrix(matrice, dtype=np.int8)
        matrice.sum_duplicates()
        matrice.data[:] = 1
        if matrice.shape != (len(ids), len(dictionary)):
            raise DimensionIncompatible(
                f"matrice {matrice.shape} pour {len(ids)} lignes x {len(dictionary)} colonnes"
            )
        if len(labels) != len(ids):
            raise DimensionIncompatible("autant d'étiquettes que de lignes attendues")
        if appels is not None and len(appels) != len(ids):
            raise DimensionIncompatible("autant de séquences d'appels que de lignes attendues")
        self.dictionary = dictionary
        self.ids = tuple(ids)
        self.matrice = matrice
        self.labels = tuple(labels)
        presentes = sorted({l for l in self.labels if l is not None})
        if families is None:
            families = presentes
        manquantes = set(presentes) - set(families)
        if manquantes:
            raise ValueError(f"étiquettes hors de la liste des familles : {sorted(manquantes)}")
        self.families = tuple(families)
        self.vocabulary = vocabulary
        self.appels = appels

    @classmethod
    def depuis_vecteurs(cls, dictionary, ids, vecteurs, labels, families=None, vocabulary=None,
                        appels=None):
        indptr = [0]
        indices = []
        for v in vecteurs:
            if v.dimension != len(dictionary):
                raise DimensionIncompatible("vecteur et dictionnaire de dimensions différentes")
            indices.extend(v.columns.tolist())
            indptr.append(len(indices))
        donnees = np.ones(len(indices), dtype=np.int8)
        matrice = sparse.csr_matrix(
            (donnees, np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
            shape=(len(ids), len(dictionary)),
        )
        return cls(dictionary, ids, matrice, labels, families, vocabulary, appels)

    def __len__(self):
        return len(self.ids)

    @property
    def dimension(self):
        return len(self.dictionary)

    def vecteur(self, i):
        debut, fin = self.matrice.indptr[i], self.matrice.indptr[i + 1]
        return FeatureVector(columns=self.matrice.indices[debut:fin], dimension=self.dimension)

    @property
    def rows(self):
        return [(self.ids[i], self.vecteur(i), self.labels[i]) for i in range(len(self))]

    def y(self):
        """Indices de famille (-1 pour une ligne sans famille)."""
        position = {f: i for i, f in enumerate(self.families)}
        return np.array([position.get(l, -1) if l is not None else -1 for l in self.labels],
                        dtype=np.int64)

    def dense(self):
        return self.matrice.toarray().astype(bool)

    def verifier_etiquettes(self, minimum=2):
        if any(l is None for l in self.labels):
            raise EtiquettesDegenerees("des lignes d'apprentissage n'ont pas de famille")
        if len(self.families) < minimum:
            raise EtiquettesDegenerees(
                f"{len(self.families)} famille(s), au moins {minimum} requises"
            )

    def sous_ensemble(self, indices, familles_globales=False):
        """Lignes choisies ; la liste des familles est recalculée sauf demande contraire."""
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            self.dictionary,
            [self.ids[i] for i in indices],
            self.matrice[indices],
            [self.labels[i] for i in indices],
            families=self.families if familles_globales else None,
            vocabulary=self.vocabulary,
            appels=self.appels.sous_ensemble(indices) if self.appels is not None else None,
        )

    def restreindre_colonnes(self, colonnes):
        colonnes = np.array(sorted(colonnes), dtype=np.int64)
        return LabeledDataset(
            self.dictionary.sous_dictionnaire(colonnes),
            self.ids,
            self.matrice[:, colonnes],
            self.labels,
            families=self.families,
            vocabulary=self.vocabulary,
            appels=self.appels,
        )

    def colonnes_observees(self):
        """Colonnes à 1 sur au moins une ligne."""
        return np.flatnonzero(np.asarray(self.matrice.sum(axis=0)).ravel() > 0)

    def aligner(self, dictionary):
        """
        Ré-exprime les lignes sur un autre dictionnaire (par jeton) ; les jetons
        absents du dictionnaire cible sont abandonnés.
        """
        cible = dictionary.index
        correspondance = np.array(
            [cible.get(t, -1) for t in self.dictionary.tokens], dtype=np.int64
        )
        coo = self.matrice.tocoo()
        garde = correspondance[coo.col] >= 0
        matrice = sparse.csr_matrix(
            (coo.data[garde], (coo.row[garde], correspondance[coo.col[garde]])),
            shape=(len(self), len(dictionary)),
        )
        return LabeledDataset(dictionary, self.ids, matrice, self.labels,
                              vocabulary=self.vocabulary, appels=self.appels)

    def filtrer_support_min(self, minimum):
        """Retire les lignes des familles de moins de `minimum` échantillons."""
        comptes = Counter(l for l in self.labels if l is not None)
        retirees = sorted(f for f, n in comptes.items() if n < minimum)
        if not retirees:
            return self, []
        garder = [i for i, l in enumerate(self.labels) if l is not None and comptes[l] >= minimum]
        logger.warning("Familles retirées (moins de %d échantillons) : %s", minimum, retirees)
        return self.sous_ensemble(garder), retirees


def construire_dataset(samples, matrices, dictionary, vocabulary=None, families=None, appels=None):
    """Vectorise tous les échantillons sur un dictionnaire commun."""
    vecteurs = [vectorize(s, m, dictionary) for s, m in zip(samples, matrices)]
    return LabeledDataset.depuis_vecteurs(
        dictionary,
        [s.id for s in samples],
        vecteurs,
        [s.family for s in samples],
        families=families,
        vocabulary=vocabulary,
        appels=appels,
    )
