#!/usr/bin/env python3
"""
Module d'orchestration du pipeline FamDroid
extraction : corpus -> vocabulaire d'API -> graphes d'appels -> matrices -> dictionnaire -> vecteurs
apprentissage : importance de forêt -> top-k -> poids -> K-means -> Adaboost par cluster
"""
import logging
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.data.ingestionCorpus import AppSample, ingest_corpus
from src.data.parseurManifest import ManifestFacts
from src.data.parseurSmali import MethodInvocations
from src.erreurs import FormatInvalide
from src.features.dictionnaireFeatures import (
    FeatureDictionary,
    FeatureVector,
    LabeledDataset,
    build_dictionary,
    construire_dataset,
)
from src.features.gainInformation import candidats_api, classer_api, prefilter_api_vocabulary
from src.graph.grapheAppels import (
    ApiVocabulary,
    SequencesCandidates,
    build_call_graph,
    exporter_liste_aretes,
    flatten_to_matrix,
    tokens_relations,
)
from src.modele.clusteringDensite import (
    ClusterModel,
    choisir_k_silhouette,
    kmeans,
    normalize_weights,
)
from src.modele.ensembleAdaptatif import EnsembleModel, predire_matrice, train_ensemble
from src.modele.foretAleatoire import importances_foret, select_top_features, train_forest
from src.pipeline.configPipeline import graine_etape

logger = logging.getLogger(__name__)


def matrices_relations(samples, vocabulary, transitive_closure=False):
    return [
        flatten_to_matrix(build_call_graph(s, vocabulary), transitive_closure)
        for s in samples
    ]


def construire_dataset_corpus(samples, config):
    """Vocabulaire pré-filtré, matrices de relations puis dictionnaire et vecteurs."""
    candidats = candidats_api(samples, config.api_prefixes)
    vocabulaire = prefilter_api_vocabulary(
        samples,
        candidats,
        config.api_vocab_size,
        ranking=config.api_ranking,
        seed=graine_etape(config.seed, "vocabulaire"),
        n_trees=config.n_trees,
        max_depth=config.tree_depth,
    )
    matrices = matrices_relations(samples, vocabulaire, config.transitive_closure)
    dictionnaire = build_dictionary(samples, matrices)
    return construire_dataset(samples, matrices, dictionnaire, vocabulaire,
                              appels=SequencesCandidates.depuis_echantillons(samples, candidats))


def extraire_corpus(root, labels, config):
    samples = ingest_corpus(root, labels, n_jobs=config.n_jobs)
    return construire_dataset_corpus(samples, config)


def echantillons_appels(dataset):
    """AppSample réduits aux appels candidats, reconstruits depuis le jeu de données."""
    if dataset.appels is None:
        raise FormatInvalide("le jeu de données ne conserve pas les séquences d'appels")
    return [
        AppSample(
            id=app_id,
            family=dataset.labels[i],
            manifest=ManifestFacts(),
            methods=tuple(MethodInvocations(f"{app_id}#{m}", s)
                          for m, s in enumerate(dataset.appels.appels(i))),
        )
        for i, app_id in enumerate(dataset.ids)
    ]


def classement_api_dataset(dataset, config, seed=None):
    """[(api, score)] sur toutes les candidates, lignes étiquetées du jeu seulement."""
    seed = config.seed if seed is None else seed
    return classer_api(
        echantillons_appels(dataset),
        dataset.appels.candidats,
        ranking=config.api_ranking,
        seed=graine_etape(seed, "vocabulaire"),
        n_trees=config.n_trees,
        max_depth=config.tree_depth,
    )


def reconstruire_relations(dataset, lignes_apprentissage, config, seed=None):
    """
    Re-classe le vocabulaire d'API sur les seules lignes d'apprentissage, puis
    recalcule les jetons apirel: de toutes les lignes. Les colonnes du manifeste
    sont reprises telles quelles.
    """
    seed = config.seed if seed is None else seed
    samples = echantillons_appels(dataset)
    vocabulaire = prefilter_api_vocabulary(
        [samples[i] for i in lignes_apprentissage],
        dataset.appels.candidats,
        config.api_vocab_size,
        ranking=config.api_ranking,
        seed=graine_etape(seed, "vocabulaire"),
        n_trees=config.n_trees,
        max_depth=config.tree_depth,
    )
    tokens, kinds = dataset.dictionary.tokens, dataset.dictionary.kinds
    manifeste = [c for c, k in enumerate(kinds) if k != "apirel"]
    jetons = []
    for i, sample in enumerate(samples):
        colonnes = dataset.vecteur(i).columns
        ligne = [tokens[c] for c in colonnes if kinds[c] != "apirel"]
        ligne.extend(tokens_relations(sample, vocabulaire, config.transitive_closure))
        jetons.append(ligne)
    dictionnaire = FeatureDictionary.depuis_tokens(
        {tokens[c] for c in manifeste}.union(*jetons))
    index = dictionnaire.index
    vecteurs = [FeatureVector(columns=np.array([index[t] for t in ligne], dtype=np.int64),
                              dimension=len(dictionnaire)) for ligne in jetons]
    return LabeledDataset.depuis_vecteurs(dictionnaire, dataset.ids, vecteurs, dataset.labels,
                                          families=dataset.families, vocabulary=vocabulaire,
                                          appels=dataset.appels)


def exporter_graphes(dataset, dossier):
    """Une liste d'arêtes <app_id>.tsv par application, sur le vocabulaire du jeu."""
    total = 0
    for sample in echantillons_appels(dataset):
        graphe = build_call_graph(sample, dataset.vocabulary)
        total += exporter_liste_aretes(graphe, os.path.join(dossier, f"{sample.id}.tsv"))
    logger.info("%d liste(s) d'arêtes écrites dans %s (%d arêtes)", len(dataset), dossier, total)
    return total


def vectoriser_pour_modele(samples, modele):
    """Vectorise un corpus de prédiction avec le vocabulaire et le dictionnaire du modèle."""
    matrices = matrices_relations(samples, modele.vocabulary, modele.config.transitive_closure)
    return construire_dataset(samples, matrices, modele.dictionary, modele.vocabulary)


def preparer_apprentissage(dataset, config):
    """Retire les lignes sans famille puis les familles sous le support minimal."""
    etiquetees = [i for i, l in enumerate(dataset.labels) if l is not None]
    if len(etiquetees) < len(dataset):
        logger.warning("%d ligne(s) sans famille ignorées pour l'apprentissage",
                       len(dataset) - len(etiquetees))
        dataset = dataset.sous_ensemble(etiquetees)
    dataset, _ = dataset.filtrer_support_min(config.min_family_support)
    dataset.verifier_etiquettes()
    return dataset


@dataclass(frozen=True, eq=False)
class ModeleFamDroid:
    config: object
    dictionary: FeatureDictionary
    vocabulary: Optional[ApiVocabulary]
    ensemble: EnsembleModel
    importances: np.ndarray
    clusters: Optional[ClusterModel] = None

    @property
    def families(self):
        return self.ensemble.families

    def predire_dataset(self, dataset):
        """(familles prédites, scores) ; les jetons inconnus du modèle sont abandonnés."""
        if dataset.dictionary != self.dictionary:
            dataset = dataset.aligner(self.dictionary)
        return predire_matrice(self.ensemble, dataset.dense())


class PipelineFamDroid:
    """Apprentissage complet sur un jeu étiqueté ; prédiction avec le modèle obtenu."""

    def __init__(self, config, seed=None):
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.modele = None

    def calculer_importances(self, dataset):
        foret = train_forest(dataset, self.config.n_trees, self.config.tree_depth,
                             graine_etape(self.seed, "foret"))
        importances = importances_foret(foret, dataset, graine_etape(self.seed, "importance"),
                                        self.config.importance_mode)
        return foret, importances

    def _choisir_k(self, lignes, poids):
        if self.config.k_auto():
            return choisir_k_silhouette(lignes, poids, max_iter=self.config.kmeans_max_iter,
                                        tol=self.config.kmeans_tol)
        k = self.config.k_clusters
        if k > lignes.shape[0]:
            logger.warning("k_clusters=%d ramené au nombre de lignes %d", k, lignes.shape[0])
            k = lignes.shape[0]
        return k

    def entrainer_depuis_importances(self, dataset, importances, top_k=None):
        """Sélection, pondération, clustering et boosting à partir d'importances déjà calculées."""
        if top_k is None:
            top_k = dataset.dimension
        colonnes, reduit = select_top_features(importances, dataset, top_k)
        valeurs = importances.values[colonnes]
        poids = normalize_weights(valeurs)
        lignes = reduit.dense().astype(np.float64)
        k = self._choisir_k(lignes, poids)
        clusters = kmeans(lignes, k, poids, self.config.kmeans_max_iter, self.config.kmeans_tol)
        ensemble = train_ensemble(reduit, clusters, self.config.boost_rounds,
                                  self.config.weak_depth, graine_etape(self.seed, "ensemble"))
        self.modele = ModeleFamDroid(
            config=self.config,
            dictionary=reduit.dictionary,
            vocabulary=dataset.vocabulary,
            ensemble=ensemble,
            importances=valeurs,
            clusters=clusters,
        )
        return self.modele

    def entrainer(self, dataset):
        dataset.verifier_etiquettes()
        _, importances = self.calculer_importances(dataset)
        return self.entrainer_depuis_importances(dataset, importances,
                                                 self.config.top_k_features)

    def predire(self, dataset):
        if self.modele is None:
            raise RuntimeError("pipeline non entraîné")
        return self.modele.predire_dataset(dataset)[0]
