import math

import numpy as np
import pytest

from src.erreurs import DimensionIncompatible
from src.features.dictionnaireFeatures import FeatureVector
from src.modele.arbreDecision import entrainer_arbre
from src.modele.clusteringDensite import ClusterModel, WeightVector, kmeans, normalize_weights
from src.modele.ensembleAdaptatif import (
    BoostedClassifier,
    EnsembleModel,
    adaptive_weights,
    distance_row,
    predict,
    predire_matrice,
    train_adaboost,
    train_ensemble,
)
from tests.donneesTest import donnees_plantees, jeu_binaire


def constant(famille, familles_cluster=None):
    familles_cluster = familles_cluster or (famille,)
    prior = np.array([1.0 if f == famille else 0.0 for f in familles_cluster])
    return BoostedClassifier(rounds=(), families=tuple(familles_cluster), prior=prior)


def ensemble_plante(k, seed=6):
    dataset = donnees_plantees(n_familles=4, par_famille=15, seed=seed)
    X = dataset.dense().astype(float)
    clusters = kmeans(X, k, normalize_weights(np.ones(dataset.dimension)))
    return dataset, clusters, train_ensemble(dataset, clusters, 10, 2, seed=2)


@pytest.fixture
def trois_centres():
    centres = np.array([[1.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    return EnsembleModel(
        k=3, centers=centres, weights=WeightVector(np.array([0.5, 0.25, 0.25])),
        classifiers=(constant("A"), constant("B"), constant("A")), families=("A", "B"),
    )


# --- train_adaboost ---------------------------------------------------------

def test_une_seule_famille():
    classifieur = train_adaboost(jeu_binaire([[1, 0], [0, 1]], ["A", "A"]), 10, 2, seed=0)
    assert classifieur.constant
    assert classifieur.predire(np.zeros((3, 2), dtype=bool)) == ["A", "A", "A"]


def test_deux_familles_separables():
    rng = np.random.default_rng(1)
    y = np.arange(30) % 2
    X = np.column_stack([rng.random(30) < 0.5, y, rng.random(30) < 0.5]).astype(bool)
    dataset = jeu_binaire(X, [f"F{v}" for v in y])
    classifieur = train_adaboost(dataset, 10, 2, seed=0)
    assert len(classifieur.rounds) <= 10
    assert classifieur.predire(X) == list(dataset.labels)


def test_reexecution_samme():
    dataset = donnees_plantees(n_familles=3, par_famille=10, n_informatives=2, n_bruit=4,
                               p_signal=0.7, seed=3)
    X, y = dataset.dense(), dataset.y()
    classifieur = train_adaboost(dataset, 3, 1, seed=0)

    poids = np.full(30, 1 / 30)
    attendus = []
    for _ in range(3):
        arbre = entrainer_arbre(X, y, 3, 1, None, poids)
        rates = arbre.predire(X) != y
        erreur = float(poids[rates].sum() / poids.sum())
        if erreur >= 1.0 - 1.0 / 3:
            break
        borne = max(erreur, 1e-10)
        alpha = float(np.log((1.0 - borne) / borne) + np.log(2))
        attendus.append((arbre, alpha))
        if erreur <= 0.0:
            break
        poids = poids * np.exp(alpha * rates)
        poids /= poids.sum()

    assert len(classifieur.rounds) >= 1
    assert len(classifieur.rounds) == len(attendus)
    votes = np.zeros((30, 3))
    for (arbre, alpha), (reference, alpha_ref) in zip(classifieur.rounds, attendus):
        assert alpha == pytest.approx(alpha_ref, abs=1e-10)
        assert arbre.predire(X).tolist() == reference.predire(X).tolist()
        votes[np.arange(30), reference.predire(X)] += alpha_ref
    np.testing.assert_allclose(classifieur.parts_de_vote(X),
                               votes / votes.sum(axis=1, keepdims=True), atol=1e-10)


def test_classe_de_rejet():
    dans = np.array([[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 1, 0]], dtype=bool)
    hors = np.array([[0, 0, 1], [0, 0, 1]], dtype=bool)
    classifieur = train_adaboost(jeu_binaire(dans, ["A", "A", "B", "B"]), 10, 2, seed=0,
                                 hors_cluster=hors)
    assert classifieur.rejet
    assert classifieur.n_classes == 3
    assert classifieur.families == ("A", "B")
    lignes = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=bool)
    proba = classifieur.probabilites(lignes, ("A", "B", "C"))
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(proba[0], [1.0, 0.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(proba[1], [0.0, 1.0, 0.0], atol=1e-9)
    # hors cluster : la part de rejet est répartie sur toutes les familles
    np.testing.assert_allclose(proba[2], [1 / 3, 1 / 3, 1 / 3], atol=1e-9)
    assert classifieur.predire(lignes[:2]) == ["A", "B"]


def test_cluster_pur_contre_rejet():
    dans = np.array([[1, 0], [1, 0]], dtype=bool)
    classifieur = train_adaboost(jeu_binaire(dans, ["A", "A"]), 5, 1, seed=0,
                                 hors_cluster=np.array([[0, 1]], dtype=bool))
    assert not classifieur.constant
    np.testing.assert_allclose(classifieur.probabilites(np.array([[0, 1]], dtype=bool), ("A", "B")),
                               [[0.5, 0.5]], atol=1e-9)


def test_hors_cluster_vide_sans_rejet():
    dataset = jeu_binaire([[1, 0], [0, 1]], ["A", "B"])
    classifieur = train_adaboost(dataset, 5, 1, seed=0, hors_cluster=np.zeros((0, 2), dtype=bool))
    assert not classifieur.rejet
    assert classifieur.n_classes == 2


# --- Poids adaptatifs -------------------------------------------------------

def test_distances_nulles():
    np.testing.assert_allclose(adaptive_weights(np.zeros(4)), [0.25] * 4)


def test_poids_a_la_main():
    np.testing.assert_allclose(adaptive_weights(np.array([0.0, 1.0])), [2 / 3, 1 / 3], atol=1e-15)


def test_proprietes_des_poids():
    rng = np.random.default_rng(2)
    D = rng.random((10000, 5)) * 3
    W = adaptive_weights(D)
    np.testing.assert_allclose(W.sum(axis=1), 1.0, rtol=0, atol=1e-12)
    assert np.all((W > 0) & (W <= 1))
    ordre = np.argsort(D, axis=1)
    assert np.all(np.diff(np.take_along_axis(W, ordre, axis=1), axis=1) < 0)


# --- distance_row -----------------------------------------------------------

def test_distance_a_la_main(trois_centres):
    d = distance_row(FeatureVector(columns=np.array([0, 2]), dimension=3), trois_centres)
    assert d[0] == 0.0
    assert d[1] == pytest.approx(math.sqrt(0.75), abs=1e-12)
    assert d[2] == pytest.approx(1.0, abs=1e-12)


def test_dimension_incompatible(trois_centres):
    with pytest.raises(DimensionIncompatible):
        distance_row(FeatureVector(columns=np.array([0]), dimension=2), trois_centres)


def test_distance_k_un(trois_centres):
    modele = EnsembleModel(k=1, centers=np.zeros((1, 3)), weights=trois_centres.weights,
                           classifiers=(constant("A"),), families=("A",))
    assert distance_row(np.ones(3), modele).shape == (1,)


# --- predict ----------------------------------------------------------------

def test_clusters_purs_vote_par_centre():
    modele = EnsembleModel(
        k=2, centers=np.array([[0.0, 0.0], [1.0, 1.0]]), weights=WeightVector(np.array([0.5, 0.5])),
        classifiers=(constant("A"), constant("B")), families=("A", "B"),
    )
    famille, scores = predict(FeatureVector(columns=np.array([], dtype=np.int64), dimension=2), modele)
    assert famille == "A"
    np.testing.assert_allclose(scores, [2 / 3, 1 / 3], atol=1e-12)


def test_famille_absente_du_cluster():
    modele = EnsembleModel(
        k=1, centers=np.zeros((1, 1)), weights=WeightVector(np.array([1.0])),
        classifiers=(constant("B", ("B", "C")),), families=("A", "B", "C"),
    )
    _, scores = predict(np.array([True]), modele)
    np.testing.assert_allclose(scores, [0.0, 1.0, 0.0])


def test_egalite_premiere_famille():
    modele = EnsembleModel(
        k=2, centers=np.array([[0.0], [0.0]]), weights=WeightVector(np.array([1.0])),
        classifiers=(constant("B"), constant("A")), families=("A", "B"),
    )
    assert predict(np.array([False]), modele)[0] == "A"


def test_k_un_equivaut_a_adaboost():
    dataset = donnees_plantees(n_familles=3, par_famille=12, seed=4)
    X = dataset.dense()
    clusters = kmeans(X.astype(float), 1, normalize_weights(np.ones(dataset.dimension)))
    ensemble = train_ensemble(dataset, clusters, 8, 2, seed=1)
    seul = ensemble.classifiers[0]
    assert not seul.rejet
    rng = np.random.default_rng(5)
    essais = np.vstack([X, rng.random((500 - len(X), dataset.dimension)) < 0.5])
    assert len(essais) == 500
    assert predire_matrice(ensemble, essais)[0] == seul.predire(essais)


@pytest.mark.parametrize("graine", range(3))
def test_permutation_des_clusters_sans_effet(graine):
    dataset, _, ensemble = ensemble_plante(3)
    ordre = np.random.default_rng(graine).permutation(ensemble.k)
    permute = EnsembleModel(
        k=ensemble.k, centers=ensemble.centers[ordre], weights=ensemble.weights,
        classifiers=tuple(ensemble.classifiers[j] for j in ordre), families=ensemble.families,
    )
    rng = np.random.default_rng(graine + 10)
    essais = np.vstack([dataset.dense(), rng.random((40, dataset.dimension)) < 0.3])
    labels, scores = predire_matrice(ensemble, essais)
    labels_permutes, scores_permutes = predire_matrice(permute, essais)
    np.testing.assert_allclose(scores_permutes, scores, atol=1e-12)
    assert labels_permutes == labels


def test_scores_sommes_a_un():
    dataset, _, ensemble = ensemble_plante(3)
    _, scores = predire_matrice(ensemble, dataset.dense())
    np.testing.assert_allclose(scores.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(scores >= 0.0)


# --- train_ensemble ---------------------------------------------------------

def test_un_classifieur_par_cluster():
    dataset, clusters, ensemble = ensemble_plante(3)
    assert len(ensemble.classifiers) == 3
    assert ensemble.families == dataset.families
    for j, classifieur in enumerate(ensemble.classifiers):
        membres = [dataset.labels[i] for i in np.flatnonzero(clusters.assignments == j)]
        assert classifieur.families == tuple(sorted(set(membres)))
        assert len(classifieur.rounds) >= 1
        assert classifieur.rejet


def test_clusters_purs_contre_rejet():
    X = np.array([[1, 0], [1, 0], [0, 1], [0, 1]], dtype=bool)
    dataset = jeu_binaire(X, ["A", "A", "B", "B"])
    clusters = ClusterModel(k=2, centers=X[[0, 2]].astype(float), assignments=np.array([0, 0, 1, 1]),
                            weights=WeightVector(np.array([0.5, 0.5])), iterations_run=1)
    ensemble = train_ensemble(dataset, clusters, 5, 2, seed=0)
    assert all(c.rejet and len(c.rounds) == 1 for c in ensemble.classifiers)
    predites, scores = predire_matrice(ensemble, X)
    assert predites == ["A", "A", "B", "B"]
    # d = (0, 1) -> poids (2/3, 1/3) ; le second cluster rejette la ligne : 1/2 par famille
    np.testing.assert_allclose(scores[0], [5 / 6, 1 / 6], atol=1e-9)
