#!/usr/bin/env python3
"""
Module du graphe d'appels d'API d'une application
Construit le graphe orienté sur le vocabulaire d'API sélectionné puis l'aplatit
en matrice binaire de relations d'appel (stockée creuse)
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Tuple

import networkx as nx
import numpy as np
from scipy import sparse

logger = logging.getLogger(__name__)

PREFIXE_RELATION = "apirel:"


@dataclass(frozen=True)
class ApiVocabulary:
    apis: Tuple[str, ...]
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for position, api in enumerate(self.apis):
            if api in index:
                raise ValueError(f"API en double dans le vocabulaire : {api}")
            index[api] = position
        object.__setattr__(self, "index", index)

    def __len__(self):
        return len(self.apis)

    def __contains__(self, api):
        return api in self.index


@dataclass(frozen=True)
class ApiCallGraph:
    vocabulary: ApiVocabulary
    graphe: nx.DiGraph = field(compare=False)

    @property
    def edges(self):
        return frozenset(self.graphe.edges())


@dataclass(frozen=True)
class RelationshipMatrix:
    vocabulary: ApiVocabulary
    present_pairs: FrozenSet[Tuple[int, int]]

    def en_sparse(self):
        """Matrice n x n au format CSR (jamais matérialisée en dense)."""
        n = len(self.vocabulary)
        if not self.present_pairs:
            return sparse.csr_matrix((n, n), dtype=np.int8)
        lignes, colonnes = zip(*sorted(self.present_pairs))
        valeurs = np.ones(len(lignes), dtype=np.int8)
        return sparse.csr_matrix((valeurs, (lignes, colonnes)), shape=(n, n))

    def aretes(self):
        """Reconstruit les arêtes (from, to) à partir des paires présentes."""
        apis = self.vocabulary.apis
        return frozenset((apis[i], apis[j]) for i, j in self.present_pairs)


@dataclass(frozen=True, eq=False)
class SequencesCandidates:
    """
    Appels de chaque application restreints aux API candidates, méthode par
    méthode, en indices dans candidats. Suffit à reconstruire les graphes d'appels
    pour tout vocabulaire inclus dans les candidates.
    """
    candidats: Tuple[str, ...]
    sequences: Tuple[Tuple[Tuple[int, ...], ...], ...]

    @classmethod
    def depuis_echantillons(cls, samples, candidats):
        index = {api: j for j, api in enumerate(candidats)}
        sequences = []
        for sample in samples:
            methodes = (tuple(index[a] for a in m.invocations if a in index) for m in sample.methods)
            sequences.append(tuple(s for s in methodes if s))
        return cls(candidats=tuple(candidats), sequences=tuple(sequences))

    def __len__(self):
        return len(self.sequences)

    def sous_ensemble(self, indices):
        return SequencesCandidates(self.candidats, tuple(self.sequences[i] for i in indices))

    def appels(self, i):
        """Séquences d'API (noms canoniques) de la ligne i, une par méthode."""
        return [tuple(self.candidats[j] for j in s) for s in self.sequences[i]]


def build_call_graph(sample, vocab):
    """
    Pour chaque méthode : filtre les appels sur le vocabulaire puis relie chaque
    paire d'appels retenus adjacents (a -> b). Pas d'arête entre méthodes.
    """
    graphe = nx.DiGraph()
    index = vocab.index
    for methode in sample.methods:
        retenus = [api for api in methode.invocations if api in index]
        for api in retenus:
            graphe.add_node(api)
        graphe.add_edges_from(zip(retenus, retenus[1:]))
    return ApiCallGraph(vocabulary=vocab, graphe=graphe)


def flatten_to_matrix(graph, transitive_closure=False):
    """
    m_ij = 1 ssi l'arête apis[i] -> apis[j] existe dans le graphe.
    transitive_closure=True remplace les arêtes par l'existence d'un chemin.
    """
    graphe = graph.graphe
    if transitive_closure and graphe.number_of_edges():
        graphe = nx.transitive_closure(graphe, reflexive=False)
    index = graph.vocabulary.index
    paires = frozenset((index[a], index[b]) for a, b in graphe.edges())
    return RelationshipMatrix(vocabulary=graph.vocabulary, present_pairs=paires)


def jeton_relation(api_source, api_cible):
    return f"{PREFIXE_RELATION}{api_source}->{api_cible}"


def pair_feature_tokens(matrix):
    """Un jeton apirel:<from>-><to> par paire présente, en ordre (ligne, colonne)."""
    apis = matrix.vocabulary.apis
    return [jeton_relation(apis[i], apis[j]) for i, j in sorted(matrix.present_pairs)]


def tokens_relations(sample, vocab, transitive_closure=False):
    """Raccourci build -> flatten -> jetons pour un échantillon."""
    matrice = flatten_to_matrix(build_call_graph(sample, vocab), transitive_closure)
    return pair_feature_tokens(matrice)


def exporter_liste_aretes(graph, fichier):
    """
    Exporte le graphe au format liste d'arêtes "from<TAB>to", une arête par ligne,
    triée, pour les outils de graphe externes.
    """
    trie = nx.DiGraph()
    trie.add_nodes_from(sorted(graph.graphe.nodes()))
    trie.add_edges_from(sorted(graph.graphe.edges()))
    dossier = os.path.dirname(fichier)
    if dossier:
        os.makedirs(dossier, exist_ok=True)
    with open(fichier, "w", encoding="utf-8", newline="\n") as f:
        for ligne in nx.generate_edgelist(trie, delimiter="\t", data=False):
            f.write(ligne + "\n")
    return trie.number_of_edges()
