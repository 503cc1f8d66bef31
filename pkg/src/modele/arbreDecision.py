#!/usr/bin/env python3
"""
Module de l'arbre de décision ID3 sur caractéristiques binaires
Découpe au gain d'information, comptes de classes pondérés dans les feuilles.
Brique commune de la forêt aléatoire et des apprenants faibles d'Adaboost.
"""
from dataclasses import dataclass

import numpy as np

from src.features.gainInformation import EPSILON_GAIN, gains_colonnes, un_parmi_k

FEUILLE = -1


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """
    Arbre stocké en tableaux parallèles, le noeud 0 est la racine.
    feature[n] = colonne testée (FEUILLE pour une feuille) ; la valeur 0 mène à
    gauche[n], la valeur 1 à droite[n] ; valeurs[n] = comptes de classes du noeud.
    """
    feature: np.ndarray
    gauche: np.ndarray
    droite: np.ndarray
    valeurs: np.ndarray
    max_depth: int

    @property
    def n_noeuds(self):
        return int(self.feature.size)

    @property
    def n_classes(self):
        return int(self.valeurs.shape[1])

    def colonnes_utilisees(self):
        return np.unique(self.feature[self.feature != FEUILLE])

    def profondeur(self):
        prof = np.zeros(self.n_noeuds, dtype=np.int64)
        for n in range(self.n_noeuds):
            if self.feature[n] != FEUILLE:
                prof[self.gauche[n]] = prof[n] + 1
                prof[self.droite[n]] = prof[n] + 1
        return int(prof.max()) if prof.size else 0

    def appliquer(self, X):
        """Indice de la feuille atteinte par chaque ligne de X (dense booléen)."""
        X = np.asarray(X, dtype=bool)
        noeuds = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            colonnes = self.feature[noeuds]
            actives = np.flatnonzero(colonnes != FEUILLE)
            if actives.size == 0:
                return noeuds
            courants = noeuds[actives]
            vers_droite = X[actives, colonnes[actives]]
            noeuds[actives] = np.where(vers_droite, self.droite[courants], self.gauche[courants])

    def distributions(self, X):
        """Distribution de classes normalisée de la feuille de chaque ligne."""
        comptes = self.valeurs[self.appliquer(X)]
        return comptes / comptes.sum(axis=1, keepdims=True)

    def predire(self, X):
        return np.argmax(self.valeurs[self.appliquer(X)], axis=1)

    def en_tableaux(self):
        return {
            "feature": self.feature.astype("<i4"),
            "gauche": self.gauche.astype("<i4"),
            "droite": self.droite.astype("<i4"),
            "valeurs": self.valeurs.astype("<f8"),
        }

    @classmethod
    def depuis_tableaux(cls, tableaux, max_depth):
        return cls(
            feature=np.asarray(tableaux["feature"], dtype=np.int64),
            gauche=np.asarray(tableaux["gauche"], dtype=np.int64),
            droite=np.asarray(tableaux["droite"], dtype=np.int64),
            valeurs=np.asarray(tableaux["valeurs"], dtype=np.float64),
            max_depth=int(max_depth),
        )


def _meilleure_colonne(X, Y_noeud, candidates):
    """
    Colonne de plus grand gain parmi les candidates (triées), None si aucun gain.
    Une colonne constante sur le noeud laisserait un enfant vide : elle est exclue.
    """
    sous = X[:, candidates]
    uns = np.count_nonzero(sous, axis=0)
    gains = np.where((uns > 0) & (uns < sous.shape[0]), gains_colonnes(sous, Y_noeud), 0.0)
    meilleur = int(np.argmax(gains))
    if gains[meilleur] <= EPSILON_GAIN:
        return None
    return int(candidates[meilleur])


def construire_arbre(X, y, n_classes, poids, max_depth, max_features, rng):
    """
    Construit un arbre ID3 sur X (n x d booléen) et y (indices de classe).
    poids : poids par ligne (comptes de bootstrap ou poids d'Adaboost), seules
    les lignes de poids > 0 participent. max_features : nombre de colonnes
    tirées à chaque noeud (None = toutes). Arrêt à max_depth, sur noeud pur ou
    à moins de 2 lignes.
    """
    X = np.asarray(X, dtype=bool)
    y = np.asarray(y, dtype=np.int64)
    poids = np.asarray(poids, dtype=np.float64)
    d = X.shape[1]
    tirage = None if max_features is None or max_features >= d else int(max_features)

    feature, gauche, droite, valeurs = [], [], [], []

    def nouveau_noeud():
        feature.append(FEUILLE)
        gauche.append(FEUILLE)
        droite.append(FEUILLE)
        valeurs.append(None)
        return len(feature) - 1

    racine = nouveau_noeud()
    pile = [(racine, np.flatnonzero(poids > 0), 0)]
    while pile:
        noeud, lignes, prof = pile.pop()
        comptes = np.bincount(y[lignes], weights=poids[lignes], minlength=n_classes)
        valeurs[noeud] = comptes
        if prof >= max_depth or np.count_nonzero(comptes) <= 1 or lignes.size < 2 or d == 0:
            continue

        X_noeud = X[lignes]
        Y_noeud = un_parmi_k(y[lignes], n_classes, poids[lignes])
        colonne = None
        if tirage is not None:
            candidates = np.sort(rng.choice(d, size=tirage, replace=False))
            colonne = _meilleure_colonne(X_noeud, Y_noeud, candidates)
        if colonne is None:
            colonne = _meilleure_colonne(X_noeud, Y_noeud, np.arange(d))
        if colonne is None:
            continue

        a_un = X_noeud[:, colonne]
        g, dr = nouveau_noeud(), nouveau_noeud()
        feature[noeud], gauche[noeud], droite[noeud] = colonne, g, dr
        pile.append((dr, lignes[a_un], prof + 1))
        pile.append((g, lignes[~a_un], prof + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        gauche=np.array(gauche, dtype=np.int64),
        droite=np.array(droite, dtype=np.int64),
        valeurs=np.vstack(valeurs).astype(np.float64),
        max_depth=int(max_depth),
    )


def nombre_candidates(d):
    """sqrt(d) colonnes candidates par noeud (au moins une)."""
    return max(1, int(np.sqrt(d)))


def entrainer_arbre(X, y, n_classes, max_depth, max_features=None, poids=None, seed=0):
    """Raccourci : arbre sur toutes les lignes à poids unitaire."""
    if poids is None:
        poids = np.ones(len(y))
    return construire_arbre(X, y, n_classes, poids, max_depth, max_features,
                            np.random.default_rng(seed))
