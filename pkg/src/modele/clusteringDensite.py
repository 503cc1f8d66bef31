#!/usr/bin/env python3
"""
Module du K-means pondéré à initialisation par densité
Distance euclidienne pondérée par dimension : d(a, b) = sqrt(somme w_i (a_i - b_i)^2)
Les poids viennent des importances de la forêt normalisées (somme 1).
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform
from sklearn.metrics import silhouette_score

from src.erreurs import DimensionIncompatible, TropPeuEchantillons

logger = logging.getLogger(__name__)

K_AUTO_MIN = 2
K_AUTO_MAX = 10


@dataclass(frozen=True, eq=False)
class WeightVector:
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or (w < 0).any() or (w > 1).any():
            raise ValueError("poids de dimension attendus dans [0, 1]")
        if w.size and abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"la somme des poids vaut {w.sum()}, 1 attendu")
        object.__setattr__(self, "w", w)

    def __len__(self):
        return int(self.w.size)


@dataclass(frozen=True, eq=False)
class ClusterModel:
    k: int
    centers: np.ndarray
    assignments: np.ndarray
    weights: WeightVector
    iterations_run: int
    historique_sse: List[float] = field(default_factory=list)
    indices_initiaux: List[int] = field(default_factory=list)


def normalize_weights(importances):
    """w_i = v_i / somme v ; importances négatives ramenées à 0, uniforme si tout est nul."""
    v = np.clip(np.asarray(getattr(importances, "values", importances), dtype=np.float64), 0.0, None)
    if v.size == 0:
        raise DimensionIncompatible("aucune dimension à pondérer")
    total = v.sum()
    if total <= 0:
        logger.warning("Importances toutes nulles : poids uniformes sur %d dimensions", v.size)
        return WeightVector(w=np.full(v.size, 1.0 / v.size))
    return WeightVector(w=v / total)


def _poids(weights):
    return weights.w if isinstance(weights, WeightVector) else np.asarray(weights, dtype=np.float64)


def _echelle(rows, weights):
    """Lignes multipliées par sqrt(w) : la distance pondérée devient euclidienne."""
    rows = np.asarray(rows, dtype=np.float64)
    w = _poids(weights)
    if rows.shape[-1] != w.size:
        raise DimensionIncompatible(f"{rows.shape[-1]} colonnes pour {w.size} poids")
    return rows * np.sqrt(w)


def weighted_distance(a, b, w):
    a = np.asarray(getattr(a, "dense", lambda: a)(), dtype=np.float64)
    b = np.asarray(getattr(b, "dense", lambda: b)(), dtype=np.float64)
    w = _poids(w)
    if not (a.shape == b.shape == w.shape):
        raise DimensionIncompatible(f"dimensions {a.shape}, {b.shape}, {w.shape}")
    return float(np.sqrt(np.sum(w * (a - b) ** 2)))


def distances_a(rows, centres, weights):
    """Matrice des distances pondérées lignes x centres."""
    return cdist(_echelle(rows, weights), _echelle(np.atleast_2d(centres), weights))


def average_distance(rows, weights):
    """Moyenne des C(m, 2) distances pondérées entre lignes distinctes."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.shape[0] < 2:
        raise TropPeuEchantillons(f"{rows.shape[0]} ligne(s), au moins 2 requises")
    return float(np.mean(pdist(_echelle(rows, weights))))


def densites(D, avg):
    """Densité de chaque ligne : nombre de q avec avg - d(p, q) > 0 (u(0) = 0)."""
    return np.sum(avg - D > 0, axis=1)


def density(rows, p, avg, weights):
    d = distances_a(rows, np.asarray(rows, dtype=np.float64)[p], weights)[:, 0]
    return int(np.sum(avg - d > 0))


def density_init(rows, k, weights):
    """
    Centres initiaux : on prend la ligne restante de plus grande densité, puis on
    retire les lignes à moins de la distance moyenne (rayon fixé une fois pour
    toutes). Si les lignes s'épuisent avant k centres, le reste est choisi par
    point le plus éloigné des centres déjà pris.
    Retourne (centres, indices des lignes choisies).
    """
    rows = np.asarray(rows, dtype=np.float64)
    m = rows.shape[0]
    if k < 1 or k > m:
        raise TropPeuEchantillons(f"k={k} centres demandés pour {m} ligne(s)")
    if m == 1:
        return rows[[0]].copy(), [0]

    D = squareform(pdist(_echelle(rows, weights)))
    avg = float(D[np.triu_indices(m, 1)].mean())
    dens = densites(D, avg)

    choisis = []
    restantes = np.ones(m, dtype=bool)
    while len(choisis) < k and restantes.any():
        candidates = np.flatnonzero(restantes)
        p = int(candidates[np.argmax(dens[candidates])])
        choisis.append(p)
        restantes &= ~(D[p] < avg)
        restantes[p] = False

    if len(choisis) < k:
        logger.warning("Initialisation par densité épuisée à %d centre(s) sur %d : "
                       "complément par point le plus éloigné", len(choisis), k)
        libres = np.ones(m, dtype=bool)
        libres[choisis] = False
        while len(choisis) < k:
            eloignement = D[:, choisis].min(axis=1)
            eloignement[~libres] = -np.inf
            p = int(np.argmax(eloignement))
            choisis.append(p)
            libres[p] = False

    return rows[choisis].copy(), choisis


def assigner(rows, centres, weights):
    """Centre pondéré le plus proche (égalités : plus petit indice) et distances."""
    D = distances_a(rows, centres, weights)
    etiquettes = np.argmin(D, axis=1)
    return etiquettes, D[np.arange(D.shape[0]), etiquettes]


def _mise_a_jour(rows, etiquettes, k, distances_propres):
    """Centres = moyenne des membres ; un cluster vide est ré-amorcé sur la ligne la plus éloignée."""
    etiquettes = etiquettes.copy()
    effectifs = np.bincount(etiquettes, minlength=k)
    for j in np.flatnonzero(effectifs == 0):
        donneurs = effectifs[etiquettes] > 1
        ecarts = np.where(donneurs, distances_propres, -np.inf)
        p = int(np.argmax(ecarts))
        logger.warning("Cluster %d vide : ré-amorcé sur la ligne %d", j, p)
        effectifs[etiquettes[p]] -= 1
        etiquettes[p] = j
        effectifs[j] = 1
    centres = np.zeros((k, rows.shape[1]))
    np.add.at(centres, etiquettes, rows)
    return centres / effectifs[:, None], etiquettes


def _sse(distances_propres):
    return float(np.sum(distances_propres ** 2))


def kmeans(rows, k, weights, max_iter=300, tol=1e-6):
    """
    Alterne mise à jour des centres (moyennes) et affectation au centre pondéré le
    plus proche, jusqu'à affectations inchangées, déplacement max <= tol ou max_iter.
    """
    rows = np.asarray(rows, dtype=np.float64)
    weights = weights if isinstance(weights, WeightVector) else WeightVector(w=weights)
    centres, initiaux = density_init(rows, k, weights)
    etiquettes, propres = assigner(rows, centres, weights)
    historique = [_sse(propres)]

    iterations = 0
    for iterations in range(1, max_iter + 1):
        nouveaux, etiquettes_maj = _mise_a_jour(rows, etiquettes, k, propres)
        deplacement = float(np.max(np.sqrt(np.sum(weights.w * (nouveaux - centres) ** 2, axis=1))))
        centres, etiquettes = nouveaux, etiquettes_maj
        if deplacement <= tol:
            # centres stables : les affectations restent celles dont ils sont la moyenne
            propres = distances_a(rows, centres, weights)[np.arange(rows.shape[0]), etiquettes]
            historique.append(_sse(propres))
            break
        nouvelles, propres = assigner(rows, centres, weights)
        historique.append(_sse(propres))
        inchangees = np.array_equal(nouvelles, etiquettes)
        etiquettes = nouvelles
        if inchangees:
            break
    logger.info("K-means : k=%d, %d itération(s), SSE finale %.6g", k, iterations, historique[-1])
    return ClusterModel(
        k=k,
        centers=centres,
        assignments=etiquettes,
        weights=weights,
        iterations_run=iterations,
        historique_sse=historique,
        indices_initiaux=list(initiaux),
    )


def choisir_k_silhouette(rows, weights, k_min=K_AUTO_MIN, k_max=K_AUTO_MAX, max_iter=300, tol=1e-6):
    """k de [k_min, k_max] maximisant la silhouette moyenne (distance pondérée)."""
    rows = np.asarray(rows, dtype=np.float64)
    m = rows.shape[0]
    echelle = _echelle(rows, weights)
    meilleur_k, meilleur_score = 1, -np.inf
    for k in range(k_min, min(k_max, m - 1) + 1):
        modele = kmeans(rows, k, weights, max_iter, tol)
        if np.unique(modele.assignments).size < 2:
            continue
        score = silhouette_score(echelle, modele.assignments)
        logger.debug("Silhouette k=%d : %.4f", k, score)
        if score > meilleur_score:
            meilleur_k, meilleur_score = k, score
    logger.info("k choisi par silhouette : %d", meilleur_k)
    return meilleur_k
