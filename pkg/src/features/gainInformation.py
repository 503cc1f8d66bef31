#!/usr/bin/env python3
"""
Module du gain d'information Ig(C, f) = H(C) - H(C|f) sur des colonnes binaires
Sert au pré-filtrage du vocabulaire d'API et aux découpes des arbres ID3
"""
import logging

import numpy as np
from scipy import sparse
from scipy.special import entr

from src.graph.grapheAppels import ApiVocabulary

logger = logging.getLogger(__name__)

PREFIXES_API_DEFAUT = (
    "Landroid/",
    "Ljava/",
    "Ljavax/",
    "Lorg/apache/",
    "Lcom/google/android/",
)
EPSILON_GAIN = 1e-12


def entropie_bits(comptes):
    """
    Entropie (en bits) de distributions données par des comptes (pondérés),
    le long du dernier axe. Une distribution vide a une entropie nulle.
    """
    comptes = np.asarray(comptes, dtype=np.float64)
    total = comptes.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(total > 0, comptes / np.where(total > 0, total, 1.0), 0.0)
    return entr(p).sum(axis=-1) / np.log(2.0)


def gains_colonnes(X, Y_pondere):
    """
    Gain d'information de chaque colonne binaire de X (n x d, dense ou creuse)
    pour les classes codées en un-parmi-K pondéré Y_pondere (n x K).
    """
    Y_pondere = np.asarray(Y_pondere, dtype=np.float64)
    if sparse.issparse(X):
        comptes_1 = np.asarray((X.T @ Y_pondere), dtype=np.float64)
    else:
        comptes_1 = np.asarray(X, dtype=np.float64).T @ Y_pondere
    total = Y_pondere.sum(axis=0)
    # poids flottants : la soustraction peut passer sous zéro
    comptes_0 = np.maximum(total[None, :] - comptes_1, 0.0)
    n = total.sum()
    if n <= 0:
        return np.zeros(comptes_1.shape[0])
    h_c = entropie_bits(total)
    n_1 = comptes_1.sum(axis=1)
    n_0 = comptes_0.sum(axis=1)
    h_cond = (n_1 / n) * entropie_bits(comptes_1) + (n_0 / n) * entropie_bits(comptes_0)
    gains = np.nan_to_num(h_c - h_cond, nan=0.0, posinf=0.0, neginf=0.0)
    return np.clip(gains, 0.0, h_c)


def un_parmi_k(y, n_classes, poids=None):
    """Matrice n x K : poids (1 par défaut) dans la colonne de la classe de chaque ligne."""
    y = np.asarray(y, dtype=np.int64)
    Y = np.zeros((y.size, n_classes), dtype=np.float64)
    Y[np.arange(y.size), y] = 1.0 if poids is None else poids
    return Y


def information_gain(dataset, column):
    """Ig(C, f) en bits pour la colonne `column` ; 0 s'il y a moins de deux familles."""
    etiquetees = [i for i, l in enumerate(dataset.labels) if l is not None]
    if len(dataset.families) < 2 or not etiquetees:
        logger.debug("Gain nul : moins de deux familles")
        return 0.0
    y = dataset.y()[etiquetees]
    X = dataset.matrice[etiquetees][:, [column]]
    return float(gains_colonnes(X, un_parmi_k(y, len(dataset.families)))[0])


def candidats_api(samples, prefixes=PREFIXES_API_DEFAUT):
    """API observées dont la classe commence par l'un des préfixes de paquet, triées."""
    prefixes = tuple(prefixes)
    return sorted({api for s in samples for api in s.apis() if api.startswith(prefixes)})


def matrice_presence(samples, candidate_apis):
    """Indicatrices de présence (échantillon x API candidate), au format CSR."""
    index = {api: j for j, api in enumerate(candidate_apis)}
    lignes, colonnes = [], []
    for i, s in enumerate(samples):
        for j in sorted({index[a] for a in s.apis() if a in index}):
            lignes.append(i)
            colonnes.append(j)
    return sparse.csr_matrix(
        (np.ones(len(lignes), dtype=np.int8), (lignes, colonnes)),
        shape=(len(samples), len(candidate_apis)),
    )


def _scores_foret(X, y, n_classes, seed, n_trees, max_depth):
    from src.modele.foretAleatoire import entrainer_foret, importances_matrice

    X = X.toarray().astype(bool)
    arbres, oob = entrainer_foret(X, y, n_classes, n_trees, max_depth, seed)
    return np.clip(importances_matrice(arbres, oob, X, y, seed), 0.0, None)


def classer_api(samples, candidate_apis, ranking="gain", seed=0, n_trees=100, max_depth=16):
    """
    Score de chaque API candidate : gain d'information de son indicatrice de
    présence, ou importance de forêt si ranking="forest". Seuls les échantillons
    étiquetés participent. Retourne [(api, score)] par score décroissant,
    égalités départagées par ordre lexicographique.
    """
    candidate_apis = sorted(set(candidate_apis))
    etiquetes = [s for s in samples if s.family is not None]
    familles = sorted({s.family for s in etiquetes})

    if len(familles) < 2:
        logger.warning("Moins de deux familles étiquetées : classement lexicographique")
        scores = np.zeros(len(candidate_apis))
    else:
        position = {f: i for i, f in enumerate(familles)}
        y = np.array([position[s.family] for s in etiquetes], dtype=np.int64)
        X = matrice_presence(etiquetes, candidate_apis)
        if ranking == "forest":
            scores = _scores_foret(X, y, len(familles), seed, n_trees, max_depth)
        else:
            scores = gains_colonnes(X, un_parmi_k(y, len(familles)))

    ordre = sorted(range(len(candidate_apis)), key=lambda j: (-scores[j], candidate_apis[j]))
    return [(candidate_apis[j], float(scores[j])) for j in ordre]


def prefilter_api_vocabulary(samples, candidate_apis, top_n, ranking="gain", seed=0,
                             n_trees=100, max_depth=16):
    """Les top_n premières API du classement (toutes s'il y en a moins)."""
    classement = classer_api(samples, candidate_apis, ranking, seed, n_trees, max_depth)
    if len(classement) < top_n:
        logger.warning("%d API candidates pour un vocabulaire de %d : toutes conservées",
                       len(classement), top_n)
    retenues = tuple(api for api, _ in classement[:top_n])
    logger.info("Vocabulaire d'API : %d retenues sur %d candidates (%s)",
                len(retenues), len(classement), ranking)
    return ApiVocabulary(apis=retenues)
