"""
Jeux de données en mémoire partagés par les tests
"""
import os

import numpy as np
from scipy import sparse

from src.data.ingestionCorpus import AppSample
from src.data.parseurManifest import ManifestFacts
from src.data.parseurSmali import MethodInvocations
from src.features.dictionnaireFeatures import FeatureDictionary, LabeledDataset
from src.pipeline.configPipeline import PipelineConfig

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")
CORPUS_FIXTURE = os.path.join(FIXTURES, "corpus")
MANIFESTES_FIXTURE = os.path.join(FIXTURES, "manifestes")


def dictionnaire_generique(d, prefixe="perm:f"):
    return FeatureDictionary.depuis_tokens([f"{prefixe}{j:03d}" for j in range(d)])


def jeu_binaire(X, labels, families=None):
    """LabeledDataset sur des colonnes perm:f000, perm:f001... (ordre des colonnes conservé)."""
    X = np.asarray(X, dtype=bool)
    ids = [f"app{i:04d}" for i in range(X.shape[0])]
    return LabeledDataset(dictionnaire_generique(X.shape[1]), ids,
                          sparse.csr_matrix(X.astype(np.int8)), labels, families)


def donnees_plantees(n_familles=4, par_famille=30, n_informatives=3, n_bruit=20,
                     p_signal=0.9, p_bruit=0.3, seed=0):
    """
    Chaque famille possède n_informatives colonnes propres (présentes avec
    p_signal), suivies de n_bruit colonnes communes (présentes avec p_bruit).
    """
    rng = np.random.default_rng(seed)
    n = n_familles * par_famille
    y = np.repeat(np.arange(n_familles), par_famille)
    X = np.zeros((n, n_familles * n_informatives + n_bruit), dtype=bool)
    for f in range(n_familles):
        membres = y == f
        colonnes = slice(f * n_informatives, (f + 1) * n_informatives)
        X[membres, colonnes] = rng.random((membres.sum(), n_informatives)) < p_signal
    X[:, n_familles * n_informatives:] = rng.random((n, n_bruit)) < p_bruit
    return jeu_binaire(X, [f"Famille{f}" for f in y])


def blobs(n_lignes=200, dimensions=20, n_blobs=3, ecart=10.0, seed=0):
    """Blobs gaussiens séparés : le blob j est décalé sur son bloc de dimensions."""
    rng = np.random.default_rng(seed)
    etiquettes = np.arange(n_lignes) % n_blobs
    centres = np.zeros((n_blobs, dimensions))
    for j, bloc in enumerate(np.array_split(np.arange(dimensions), n_blobs)):
        centres[j, bloc] = ecart
    lignes = centres[etiquettes] + rng.normal(0.0, 1.0, (n_lignes, dimensions))
    return lignes, etiquettes


def echantillon(app_id, famille=None, sequences=(), permissions=()):
    """AppSample minimal : une méthode par séquence d'appels."""
    return AppSample(
        id=app_id,
        family=famille,
        manifest=ManifestFacts(permissions=frozenset(permissions)),
        methods=tuple(MethodInvocations(f"L{app_id};->m{i}()V", tuple(s))
                      for i, s in enumerate(sequences)),
    )


def config_rapide(**changements):
    """Configuration réduite pour des tests de bout en bout rapides."""
    valeurs = dict(api_vocab_size=500, top_k_features=200, k_clusters=2, n_trees=20,
                   tree_depth=8, boost_rounds=10, weak_depth=2, n_folds=3,
                   min_family_support=3, seed=7)
    valeurs.update(changements)
    return PipelineConfig(**valeurs)
