#!/usr/bin/env python3
"""
Module de la forêt aléatoire (agrégation d'arbres ID3 sur échantillons bootstrap)
Erreur hors-sac (OOB) et importance par permutation :
    M(f) = somme sur les arbres de (e2 - e1) / N_t
e1 = erreur OOB de l'arbre, e2 = erreur OOB après brouillage de la colonne f
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.erreurs import DimensionIncompatible
from src.modele.arbreDecision import DecisionTree, construire_arbre, nombre_candidates

logger = logging.getLogger(__name__)

MODES_IMPORTANCE = ("permutation", "bernoulli")


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: Tuple[DecisionTree, ...]
    oob_masks: Tuple[np.ndarray, ...]
    families: Tuple[str, ...]
    rng_seed: int
    dimension: int

    @property
    def n_trees(self):
        return len(self.trees)


@dataclass(frozen=True, eq=False)
class ErreurOOB:
    """Erreurs OOB par arbre (nan si l'arbre n'a aucune ligne OOB) et agrégée."""
    par_arbre: np.ndarray
    e1: float
    exclus: int


@dataclass(frozen=True, eq=False)
class ImportanceVector:
    values: np.ndarray

    def __len__(self):
        return int(self.values.size)

    def clippees(self):
        return np.clip(self.values, 0.0, None)


def entrainer_foret(X, y, n_classes, n_trees, max_depth, seed, max_features="sqrt"):
    """
    Entraîne n_trees arbres, chacun sur un bootstrap de taille n (avec remise).
    Retourne (arbres, masques OOB). Un graine fille par arbre (SeedSequence).
    """
    X = np.asarray(X, dtype=bool)
    n, d = X.shape
    if max_features == "sqrt":
        max_features = nombre_candidates(d)
    arbres, masques = [], []
    for graine in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(graine)
        comptes = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
        arbres.append(construire_arbre(X, y, n_classes, comptes, max_depth, max_features, rng))
        masques.append(comptes == 0)
    return tuple(arbres), tuple(masques)


def train_forest(dataset, n_trees, max_depth, seed):
    dataset.verifier_etiquettes()
    arbres, masques = entrainer_foret(
        dataset.dense(), dataset.y(), len(dataset.families), n_trees, max_depth, seed
    )
    logger.info("Forêt : %d arbres, profondeur max %d, %d lignes x %d colonnes",
                n_trees, max_depth, len(dataset), dataset.dimension)
    return ForestModel(
        trees=arbres,
        oob_masks=masques,
        families=dataset.families,
        rng_seed=int(seed),
        dimension=dataset.dimension,
    )


def probabilites_foret(model, X):
    """Moyenne des distributions de feuilles sur les arbres (n x familles)."""
    X = np.asarray(X, dtype=bool)
    if X.shape[1] != model.dimension:
        raise DimensionIncompatible(f"{X.shape[1]} colonnes pour une forêt de dimension {model.dimension}")
    somme = np.zeros((X.shape[0], len(model.families)))
    for arbre in model.trees:
        somme += arbre.distributions(X)
    return somme / model.n_trees


def predict_forest(model, x):
    """(famille prédite, vecteur de probabilités) pour un FeatureVector."""
    if x.dimension != model.dimension:
        raise DimensionIncompatible(f"vecteur de dimension {x.dimension}, forêt {model.dimension}")
    proba = probabilites_foret(model, x.dense()[None, :])[0]
    return model.families[int(np.argmax(proba))], proba


def _erreurs_arbres(arbres, masques, X, y):
    erreurs = np.full(len(arbres), np.nan)
    for t, (arbre, oob) in enumerate(zip(arbres, masques)):
        if oob.any():
            erreurs[t] = np.mean(arbre.predire(X[oob]) != y[oob])
    return erreurs


def oob_error(model, dataset):
    """
    Erreurs OOB par arbre et erreur agrégée e1 : vote des arbres pour lesquels
    la ligne est hors-sac. Les lignes jamais hors-sac sont exclues et comptées.
    """
    X = dataset.dense()
    y = dataset.y()
    par_arbre = _erreurs_arbres(model.trees, model.oob_masks, X, y)
    votes = np.zeros((X.shape[0], len(model.families)))
    for arbre, oob in zip(model.trees, model.oob_masks):
        if oob.any():
            votes[oob] += arbre.distributions(X[oob])
    couvertes = votes.sum(axis=1) > 0
    exclus = int((~couvertes).sum())
    if exclus:
        logger.warning("%d ligne(s) jamais hors-sac exclues de l'erreur OOB", exclus)
    if couvertes.any():
        e1 = float(np.mean(np.argmax(votes[couvertes], axis=1) != y[couvertes]))
    else:
        e1 = float("nan")
    return ErreurOOB(par_arbre=par_arbre, e1=e1, exclus=exclus)


def _brouiller(colonne_oob, rng, mode):
    if mode == "bernoulli":
        return rng.random(colonne_oob.size) < colonne_oob.mean()
    return rng.permutation(colonne_oob)


def _ecart_arbre(arbre, oob, e1, X, y, colonne, seed, t, mode):
    """(e2 - e1) d'un arbre ; 0 si l'arbre ne teste pas la colonne."""
    if not oob.any() or colonne not in arbre.feature:
        return 0.0
    X_oob = X[oob].copy()
    rng = np.random.default_rng([int(seed), t, int(colonne)])
    X_oob[:, colonne] = _brouiller(X_oob[:, colonne], rng, mode)
    e2 = np.mean(arbre.predire(X_oob) != y[oob])
    return float(e2 - e1)


def permutation_importance(model, dataset, column, seed, mode="permutation"):
    """M(f) pour une colonne : somme des (e2 - e1) dans l'ordre des arbres, / N_t."""
    X = dataset.dense()
    y = dataset.y()
    e1 = _erreurs_arbres(model.trees, model.oob_masks, X, y)
    total = 0.0
    for t, (arbre, oob) in enumerate(zip(model.trees, model.oob_masks)):
        total += _ecart_arbre(arbre, oob, e1[t], X, y, column, seed, t, mode)
    return total / model.n_trees


def importances_matrice(arbres, masques, X, y, seed, mode="permutation"):
    """
    Importance par permutation de toutes les colonnes. Seules les colonnes testées
    par un arbre reçoivent une contribution de cet arbre ; sommes dans l'ordre des arbres.
    """
    if mode not in MODES_IMPORTANCE:
        raise ValueError(f"mode d'importance inconnu : {mode}")
    X = np.asarray(X, dtype=bool)
    e1 = _erreurs_arbres(arbres, masques, X, y)
    totaux = np.zeros(X.shape[1])
    for t, (arbre, oob) in enumerate(zip(arbres, masques)):
        for colonne in arbre.colonnes_utilisees():
            totaux[colonne] += _ecart_arbre(arbre, oob, e1[t], X, y, int(colonne), seed, t, mode)
    return totaux / len(arbres)


def importances_foret(model, dataset, seed, mode="permutation"):
    valeurs = importances_matrice(model.trees, model.oob_masks, dataset.dense(), dataset.y(),
                                  seed, mode)
    logger.info("Importances : %d colonnes non nulles sur %d",
                int(np.count_nonzero(valeurs)), valeurs.size)
    return ImportanceVector(values=valeurs)


def select_top_features(importances, dataset, top_k):
    """
    Garde les top_k colonnes par importance décroissante (égalités : ordre
    lexicographique des jetons) ; le jeu réduit conserve l'ordre des colonnes.
    """
    d = dataset.dimension
    if top_k > d:
        logger.warning("top_k=%d ramené à la dimension %d", top_k, d)
        top_k = d
    jetons = dataset.dictionary.tokens
    valeurs = importances.values
    ordre = sorted(range(d), key=lambda j: (-valeurs[j], jetons[j]))
    colonnes = np.array(sorted(ordre[:top_k]), dtype=np.int64)
    return colonnes, dataset.restreindre_colonnes(colonnes)
