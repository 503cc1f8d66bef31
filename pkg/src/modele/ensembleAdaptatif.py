#!/usr/bin/env python3
"""
Module de l'ensemble adaptatif : un Adaboost (SAMME) par cluster, puis vote
pondéré par la distance de l'échantillon à chaque centre
    w_ij = (1 + d_ij)^-1 / somme_q (1 + d_iq)^-1
    P(y_i = u) = somme_j P(F_j(y_i) = u) * w_ij
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.erreurs import DimensionIncompatible
from src.modele.arbreDecision import DecisionTree, construire_arbre
from src.modele.clusteringDensite import WeightVector, distances_a

logger = logging.getLogger(__name__)

ERREUR_MIN = 1e-10


@dataclass(frozen=True, eq=False)
class BoostedClassifier:
    """
    rounds : (apprenant faible, alpha) ; families : familles vues dans le cluster.
    prior : distribution utilisée quand aucun tour n'a été retenu.
    rejet : les arbres connaissent une classe supplémentaire (indice len(families))
    pour les lignes d'entraînement hors du cluster.
    """
    rounds: Tuple[Tuple[DecisionTree, float], ...]
    families: Tuple[str, ...]
    prior: np.ndarray
    rejet: bool = False

    @property
    def constant(self):
        return not self.rounds

    @property
    def n_classes(self):
        return len(self.families) + int(self.rejet)

    def parts_de_vote(self, X):
        """
        Part de vote alpha de chaque classe (n x n_classes) ; la dernière colonne
        est la part hors cluster quand rejet est vrai.
        """
        X = np.asarray(X, dtype=bool)
        if self.constant:
            base = np.zeros(self.n_classes)
            base[:len(self.families)] = self.prior
            return np.tile(base, (X.shape[0], 1))
        votes = np.zeros((X.shape[0], self.n_classes))
        lignes = np.arange(X.shape[0])
        for arbre, alpha in self.rounds:
            votes[lignes, arbre.predire(X)] += alpha
        return votes / votes.sum(axis=1, keepdims=True)

    def probabilites(self, X, familles_globales):
        """
        Parts de vote sur la liste globale ; familles absentes du cluster à 0,
        part hors cluster répartie uniformément sur toutes les familles.
        """
        parts = self.parts_de_vote(X)
        position = {f: i for i, f in enumerate(familles_globales)}
        proba = np.zeros((parts.shape[0], len(familles_globales)))
        proba[:, [position[f] for f in self.families]] = parts[:, :len(self.families)]
        if self.rejet:
            proba += parts[:, [len(self.families)]] / len(familles_globales)
        return proba

    def predire(self, X):
        parts = self.parts_de_vote(X)[:, :len(self.families)]
        return [self.families[i] for i in np.argmax(parts, axis=1)]


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    k: int
    centers: np.ndarray
    weights: WeightVector
    classifiers: Tuple[BoostedClassifier, ...]
    families: Tuple[str, ...]

    @property
    def dimension(self):
        return int(self.centers.shape[1])


def train_adaboost(dataset, n_rounds, weak_depth, seed, hors_cluster=None):
    """
    SAMME sur les lignes d'un cluster : arbres de profondeur weak_depth,
    alpha = log((1 - err) / err) + log(K - 1). Arrêt si err >= 1 - 1/K ou err = 0.
    hors_cluster : matrice booléenne des autres lignes d'entraînement ; non vide,
    elle forme une classe de rejet et pèse autant au départ que le cluster.
    """
    familles = dataset.families
    K = len(familles)
    y = dataset.y()
    prior = np.bincount(y, minlength=K).astype(np.float64)
    prior /= prior.sum()
    X = dataset.dense()
    poids = np.full(len(y), 1.0 / len(y))
    rejet = hors_cluster is not None and np.shape(hors_cluster)[0] > 0
    if rejet:
        hors = np.asarray(hors_cluster, dtype=bool)
        X = np.vstack([X, hors])
        y = np.concatenate([y, np.full(hors.shape[0], K, dtype=y.dtype)])
        poids = np.concatenate([poids, np.full(hors.shape[0], 1.0 / hors.shape[0])]) / 2.0
    n_classes = K + int(rejet)
    if n_classes <= 1:
        return BoostedClassifier(rounds=(), families=familles, prior=prior)

    rng = np.random.default_rng(seed)
    tours = []
    for tour in range(n_rounds):
        arbre = construire_arbre(X, y, n_classes, poids, weak_depth, None, rng)
        rates = arbre.predire(X) != y
        erreur = float(poids[rates].sum() / poids.sum())
        if erreur >= 1.0 - 1.0 / n_classes:
            logger.debug("Tour %d : erreur %.4f non admissible, arrêt", tour, erreur)
            break
        erreur_bornee = max(erreur, ERREUR_MIN)
        alpha = float(np.log((1.0 - erreur_bornee) / erreur_bornee) + np.log(n_classes - 1))
        tours.append((arbre, alpha))
        if erreur <= 0.0:
            break
        poids = poids * np.exp(alpha * rates)
        poids /= poids.sum()
    if not tours:
        logger.warning("Aucun apprenant admissible sur %d lignes : distribution a priori", len(y))
        rejet = False
    return BoostedClassifier(rounds=tuple(tours), families=familles, prior=prior, rejet=rejet)


def _lignes_denses(x, dimension):
    if hasattr(x, "dense"):
        if x.dimension != dimension:
            raise DimensionIncompatible(f"vecteur de dimension {x.dimension}, modèle {dimension}")
        return x.dense()[None, :]
    X = np.atleast_2d(np.asarray(x, dtype=bool))
    if X.shape[1] != dimension:
        raise DimensionIncompatible(f"{X.shape[1]} colonnes, modèle {dimension}")
    return X


def distance_row(x, model):
    """(d_i1, ..., d_ik) : distance pondérée de x à chaque centre."""
    return distances_a(_lignes_denses(x, model.dimension), model.centers, model.weights)[0]


def adaptive_weights(d):
    """Poids inverses de (1 + d), normalisés à 1 le long du dernier axe."""
    inverses = 1.0 / (1.0 + np.asarray(d, dtype=np.float64))
    return inverses / inverses.sum(axis=-1, keepdims=True)


def scores_ensemble(model, X):
    """Scores par famille (n x familles) pour une matrice booléenne."""
    X = _lignes_denses(X, model.dimension)
    W = adaptive_weights(distances_a(X, model.centers, model.weights))
    scores = np.zeros((X.shape[0], len(model.families)))
    for j, classifieur in enumerate(model.classifiers):
        scores += classifieur.probabilites(X, model.families) * W[:, [j]]
    return scores


def predire_matrice(model, X):
    scores = scores_ensemble(model, X)
    return [model.families[i] for i in np.argmax(scores, axis=1)], scores


def predict(x, model):
    """(famille prédite, vecteur de scores) ; égalités : première famille."""
    scores = scores_ensemble(model, x)[0]
    return model.families[int(np.argmax(scores))], scores


def train_ensemble(dataset, cluster_model, n_rounds, weak_depth, seed, families=None):
    """
    Un Adaboost par cluster : les familles sont apprises sur les seules lignes
    du cluster, les autres lignes ne servent que de classe de rejet.
    """
    familles = tuple(families) if families is not None else dataset.families
    X = dataset.dense()
    classifieurs = []
    graines = np.random.SeedSequence(seed).spawn(cluster_model.k)
    for j in range(cluster_model.k):
        membres = np.flatnonzero(cluster_model.assignments == j)
        sous = dataset.sous_ensemble(membres)
        graine = int(graines[j].generate_state(1)[0])
        hors = np.flatnonzero(cluster_model.assignments != j)
        classifieur = train_adaboost(sous, n_rounds, weak_depth, graine, hors_cluster=X[hors])
        logger.info("Cluster %d : %d lignes, %d famille(s), %d tour(s)",
                    j, len(membres), len(sous.families), len(classifieur.rounds))
        classifieurs.append(classifieur)
    return EnsembleModel(
        k=cluster_model.k,
        centers=np.asarray(cluster_model.centers, dtype=np.float64),
        weights=cluster_model.weights,
        classifiers=tuple(classifieurs),
        families=familles,
    )
