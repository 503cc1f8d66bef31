#!/usr/bin/env python3
"""
Module de validation croisée stratifiée
Chaque pli reconstruit son propre dictionnaire (colonnes vues dans les plis
d'apprentissage uniquement), ses importances, ses clusters et ses classifieurs.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import List

import numpy as np
from sklearn.model_selection import StratifiedKFold

from src.erreurs import ConfigInvalide, FamilleTropPetite
from src.eval.metriques import compute_metrics, moyenne_rapports
from src.pipeline.configPipeline import graine_etape, graine_pli
from src.pipeline.pipelineFamDroid import PipelineFamDroid, reconstruire_relations

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FoldPlan:
    n_folds: int
    fold_of: np.ndarray
    seed: int

    def indices(self, pli):
        """(lignes d'apprentissage, lignes de test) du pli."""
        return np.flatnonzero(self.fold_of != pli), np.flatnonzero(self.fold_of == pli)


@dataclass(frozen=True, eq=False)
class ResultatValidation:
    plan: FoldPlan
    rapports: List
    moyenne: object
    predictions: List[str]
    dictionnaires: List[tuple]


def make_folds(dataset, n_folds, seed):
    """Partition stratifiée des lignes en n_folds plis, déterministe pour une graine."""
    if n_folds < 2:
        raise ConfigInvalide(f"n_folds={n_folds} : au moins 2 plis requis")
    comptes = Counter(dataset.labels)
    for famille in dataset.families:
        if comptes[famille] < n_folds:
            raise FamilleTropPetite(famille, comptes[famille], n_folds)
    y = dataset.y()
    stratifie = StratifiedKFold(n_splits=n_folds, shuffle=True, random_state=seed % (2 ** 32))
    fold_of = np.full(len(dataset), -1, dtype=np.int64)
    for pli, (_, test) in enumerate(stratifie.split(np.zeros(len(y)), y)):
        fold_of[test] = pli
    return FoldPlan(n_folds=n_folds, fold_of=fold_of, seed=seed)


def donnees_pli(dataset, plan, pli, config=None):
    """
    Jeu d'apprentissage restreint aux colonnes observées sur ses lignes, jeu de
    test ré-exprimé sur ce dictionnaire (jetons inconnus abandonnés).
    Avec une configuration et des séquences d'appels conservées, le vocabulaire
    d'API est d'abord re-classé sur les seules lignes d'apprentissage.
    """
    apprentissage, test = plan.indices(pli)
    if config is not None and dataset.appels is not None:
        dataset = reconstruire_relations(dataset, apprentissage, config,
                                         seed=graine_pli(config.seed, pli))
    train = dataset.sous_ensemble(apprentissage)
    train = train.restreindre_colonnes(train.colonnes_observees())
    held_out = dataset.sous_ensemble(test, familles_globales=True).aligner(train.dictionary)
    return train, held_out


def cross_validate(dataset, config, fabrique=PipelineFamDroid):
    """
    Pour chaque pli : apprentissage sur les autres plis via fabrique(config, seed=...)
    (objet avec entrainer(dataset) et predire(dataset)), métriques sur le pli tenu à part.
    """
    plan = make_folds(dataset, config.n_folds, graine_etape(config.seed, "plis"))
    rapports, dictionnaires = [], []
    predictions = [None] * len(dataset)
    for pli in range(plan.n_folds):
        train, test = donnees_pli(dataset, plan, pli, config)
        pipeline = fabrique(config, seed=graine_pli(config.seed, pli))
        pipeline.entrainer(train)
        predites = pipeline.predire(test)
        rapport = compute_metrics(test.labels, predites, dataset.families)
        logger.info("Pli %d/%d : accuracy %.4f, F1 macro %.4f",
                    pli + 1, plan.n_folds, rapport.accuracy, rapport.macro_f1)
        rapports.append(rapport)
        modele = getattr(pipeline, "modele", None)
        dictionnaire = getattr(modele, "dictionary", train.dictionary)
        dictionnaires.append(tuple(dictionnaire.tokens))
        for i, p in zip(plan.indices(pli)[1], predites):
            predictions[i] = p
    return ResultatValidation(
        plan=plan,
        rapports=rapports,
        moyenne=moyenne_rapports(rapports),
        predictions=predictions,
        dictionnaires=dictionnaires,
    )


def balayer_top_k(dataset, config, valeurs_top_k):
    """
    Courbe accuracy / F1 macro selon le nombre de caractéristiques retenues.
    Une forêt et un vecteur d'importances par pli, réutilisés pour chaque top_k ;
    None signifie toutes les colonnes du pli.
    """
    plan = make_folds(dataset, config.n_folds, graine_etape(config.seed, "plis"))
    par_valeur = {i: [] for i in range(len(valeurs_top_k))}
    for pli in range(plan.n_folds):
        train, test = donnees_pli(dataset, plan, pli, config)
        pipeline = PipelineFamDroid(config, seed=graine_pli(config.seed, pli))
        _, importances = pipeline.calculer_importances(train)
        for i, top_k in enumerate(valeurs_top_k):
            k = train.dimension if top_k is None else min(top_k, train.dimension)
            modele = pipeline.entrainer_depuis_importances(train, importances, k)
            predites, _ = modele.predire_dataset(test)
            par_valeur[i].append(compute_metrics(test.labels, predites, dataset.families))
        logger.info("Pli %d/%d balayé (%d valeurs de top_k)", pli + 1, plan.n_folds,
                    len(valeurs_top_k))
    points = []
    for i, top_k in enumerate(valeurs_top_k):
        moyenne = moyenne_rapports(par_valeur[i])
        points.append({
            "top_k": "all" if top_k is None else top_k,
            "accuracy": moyenne.accuracy,
            "macro_f1": moyenne.macro_f1,
        })
    return points
