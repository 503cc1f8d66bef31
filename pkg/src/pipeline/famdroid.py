#!/usr/bin/env python3
"""
Point d'entrée en ligne de commande de FamDroid
    python -m src.pipeline.famdroid synth   <dossier> [--total 1000 --familles 10]
    python -m src.pipeline.famdroid extract <corpus> --labels etiquettes.tsv --out dataset.json
    python -m src.pipeline.famdroid train   <dataset.json> --out modele.fdm
    python -m src.pipeline.famdroid predict <modele.fdm> <corpus|dataset.json> --out predictions.csv
    python -m src.pipeline.famdroid evaluate <dataset.json> --out rapports/
    python -m src.pipeline.famdroid sweep   <dataset.json> --out balayage.csv
Codes de sortie : 0 succès, 1 erreur d'usage, 2 erreur de données, 3 erreur interne
"""
import argparse
import os
import sys
import traceback

import numpy as np

from src.data.generateurCorpus import SyntheticSpec, generer_corpus
from src.data.ingestionCorpus import ingest_corpus
from src.erreurs import ErreurFamDroid, ErreurUsage
from src.eval.metriques import tableau_texte
from src.eval.validationCroisee import balayer_top_k, cross_validate
from src.journalisation import NIVEAUX, configurer_journal
from src.modele.clusteringDensite import distances_a
from src.pipeline import persistance
from src.pipeline.configPipeline import resoudre_config
from src.pipeline.pipelineFamDroid import (
    PipelineFamDroid,
    classement_api_dataset,
    exporter_graphes,
    extraire_corpus,
    preparer_apprentissage,
    vectoriser_pour_modele,
)


class ParseurFamDroid(argparse.ArgumentParser):
    """argparse qui lève ErreurUsage au lieu de quitter avec le code 2."""

    def error(self, message):
        raise ErreurUsage(message)


# --- Commandes --------------------------------------------------------------

def cmd_extract(corpus, config, sortie, labels=None, classement_csv=None, dossier_aretes=None):
    print("Étape 1: Ingestion du corpus et extraction des caractéristiques...")
    dataset = extraire_corpus(corpus, labels, config)
    print(f"✔ {len(dataset)} application(s), {len(dataset.families)} famille(s)")
    for genre, nombre in dataset.dictionary.comptes_par_type().items():
        print(f"   {genre:<7} {nombre}")
    print("Étape 2: Écriture du jeu de données...")
    lignes = persistance.sauvegarder_dataset(dataset, sortie, prefixes=config.api_prefixes)
    print(f"✔ Jeu de données écrit : {sortie} (+ {os.path.basename(lignes)})")
    if classement_csv:
        classement = classement_api_dataset(dataset, config)
        persistance.exporter_classement_api(classement_csv, classement)
        print(f"✔ Classement de {len(classement)} API écrit : {classement_csv}")
    if dossier_aretes:
        aretes = exporter_graphes(dataset, dossier_aretes)
        print(f"✔ Graphes d'appels écrits dans {dossier_aretes} ({aretes} arête(s))")
    return dataset


def _exporter_clusters(modele, dataset, fichier):
    lignes = dataset.aligner(modele.dictionary).dense()
    clusters = modele.clusters
    distances = distances_a(lignes, clusters.centers, clusters.weights)
    propres = distances[np.arange(len(lignes)), clusters.assignments]
    persistance.exporter_clusters(fichier, dataset.ids, clusters.assignments, propres)


def cmd_train(fichier_dataset, config, sortie, importances_csv=None, clusters_csv=None):
    print("Étape 1: Chargement du jeu de données...")
    dataset = preparer_apprentissage(persistance.charger_dataset(fichier_dataset), config)
    print(f"✔ {len(dataset)} ligne(s), {dataset.dimension} caractéristique(s), "
          f"{len(dataset.families)} famille(s)")
    print("Étape 2: Forêt aléatoire, sélection, clustering et Adaboost par cluster...")
    modele = PipelineFamDroid(config).entrainer(dataset)
    print(f"✔ {len(modele.dictionary)} caractéristique(s) retenue(s), "
          f"k={modele.ensemble.k} cluster(s)")
    print("Étape 3: Écriture du modèle...")
    persistance.sauvegarder_modele(modele, sortie)
    if importances_csv:
        persistance.exporter_importances(importances_csv, modele.dictionary, modele.importances)
    if clusters_csv:
        _exporter_clusters(modele, dataset, clusters_csv)
    print(f"✔ Modèle écrit : {sortie}")
    return modele


def cmd_predict(fichier_modele, entree, sortie, labels=None):
    print("Étape 1: Chargement du modèle...")
    modele = persistance.charger_modele(fichier_modele)
    print("Étape 2: Préparation des échantillons...")
    if os.path.isdir(entree):
        dataset = vectoriser_pour_modele(ingest_corpus(entree, labels, modele.config.n_jobs), modele)
    else:
        dataset = persistance.charger_dataset(entree)
    print(f"✔ {len(dataset)} échantillon(s)")
    print("Étape 3: Prédiction...")
    predites, scores = modele.predire_dataset(dataset)
    persistance.exporter_predictions(sortie, dataset.ids, predites, scores, modele.families)
    connues = [i for i, l in enumerate(dataset.labels) if l is not None]
    if connues:
        accord = np.mean([predites[i] == dataset.labels[i] for i in connues])
        print(f"   Accord avec les familles connues : {accord:.4f} ({len(connues)} échantillon(s))")
    print(f"✔ Prédictions écrites : {sortie}")
    return predites, scores


def cmd_evaluate(fichier_dataset, config, dossier_sortie):
    print("Étape 1: Chargement du jeu de données...")
    dataset = preparer_apprentissage(persistance.charger_dataset(fichier_dataset), config)
    print(f"Étape 2: Validation croisée en {config.n_folds} plis...")
    resultat = cross_validate(dataset, config)
    moyenne = resultat.moyenne
    os.makedirs(dossier_sortie, exist_ok=True)
    persistance.ecrire_json(os.path.join(dossier_sortie, "rapport.json"), {
        "config": config.en_dict(),
        "moyenne": moyenne.en_dict(),
        "plis": [r.en_dict() for r in resultat.rapports],
    })
    persistance.exporter_confusion(os.path.join(dossier_sortie, "confusion.csv"),
                                   moyenne.confusion, moyenne.families)
    persistance.exporter_precision_familles(
        os.path.join(dossier_sortie, "precision_familles.csv"), moyenne)
    tableau = tableau_texte([("FamDroid", moyenne)])
    persistance.ecrire_atomique(os.path.join(dossier_sortie, "tableau.txt"),
                                (tableau + "\n").encode("utf-8"))
    print(tableau)
    print(f"✔ Accuracy moyenne {moyenne.accuracy:.4f}, F1 macro {moyenne.macro_f1:.4f}")
    print(f"✔ Rapports écrits dans {dossier_sortie}")
    return resultat


def cmd_sweep(fichier_dataset, config, sortie):
    print("Étape 1: Chargement du jeu de données...")
    dataset = preparer_apprentissage(persistance.charger_dataset(fichier_dataset), config)
    valeurs = config.valeurs_sweep()
    print(f"Étape 2: Balayage de top_k sur {len(valeurs)} valeur(s)...")
    points = balayer_top_k(dataset, config, valeurs)
    for p in points:
        print(f"   top_k={p['top_k']!s:<6} accuracy={p['accuracy']:.4f} F1={p['macro_f1']:.4f}")
    persistance.exporter_balayage(sortie, points)
    print(f"✔ Courbe écrite : {sortie}")
    return points


def cmd_synth(spec, cible):
    print(f"Étape 1: Génération de {spec.n_total} application(s) "
          f"en {len(spec.familles)} famille(s)...")
    resultat = generer_corpus(spec, cible)
    print(f"✔ Corpus écrit dans {cible}")
    return resultat


# --- Analyse des arguments --------------------------------------------------

_OPTIONS_CONFIG = (
    ("--api-vocab-size", "api_vocab_size", int),
    ("--top-k-features", "top_k_features", int),
    ("--k-clusters", "k_clusters", str),
    ("--n-trees", "n_trees", int),
    ("--tree-depth", "tree_depth", int),
    ("--boost-rounds", "boost_rounds", int),
    ("--weak-depth", "weak_depth", int),
    ("--n-folds", "n_folds", int),
    ("--min-family-support", "min_family_support", int),
    ("--api-prefixes", "api_prefixes", str),
    ("--api-ranking", "api_ranking", str),
    ("--importance-mode", "importance_mode", str),
    ("--kmeans-max-iter", "kmeans_max_iter", int),
    ("--kmeans-tol", "kmeans_tol", float),
    ("--n-jobs", "n_jobs", int),
    ("--sweep-top-k", "sweep_top_k", str),
)


def _options_communes(parseur):
    parseur.add_argument("--log-level", default="INFO", choices=NIVEAUX)


def _options_config(parseur):
    _options_communes(parseur)
    parseur.add_argument("--config", help="fichier JSON de configuration (ex. configBureau.json)")
    parseur.add_argument("--seed", type=int)
    for option, nom, type_ in _OPTIONS_CONFIG:
        parseur.add_argument(option, dest=nom, type=type_)
    parseur.add_argument("--transitive-closure", dest="transitive_closure",
                         action="store_true", default=None)


def construire_parseur():
    parseur = ParseurFamDroid(prog="famdroid", description="Classification de familles de malwares Android")
    sous = parseur.add_subparsers(dest="commande", parser_class=ParseurFamDroid)
    sous.required = True

    p = sous.add_parser("extract", help="corpus décompilé -> jeu de données")
    p.add_argument("corpus")
    p.add_argument("--labels")
    p.add_argument("--out", required=True)
    p.add_argument("--api-ranking-csv", help="classement des API candidates (api,score,rank)")
    p.add_argument("--edges-dir", help="une liste d'arêtes <app_id>.tsv par application")
    _options_config(p)

    p = sous.add_parser("train", help="jeu de données -> modèle")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--importances-csv")
    p.add_argument("--clusters-csv")
    _options_config(p)

    p = sous.add_parser("predict", help="modèle + corpus ou jeu de données -> prédictions CSV")
    p.add_argument("modele")
    p.add_argument("entree")
    p.add_argument("--labels")
    p.add_argument("--out", required=True)
    _options_communes(p)

    p = sous.add_parser("evaluate", help="validation croisée stratifiée")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    _options_config(p)

    p = sous.add_parser("sweep", help="courbe accuracy / F1 selon top_k")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    _options_config(p)

    p = sous.add_parser("synth", help="corpus synthétique à signatures plantées")
    p.add_argument("out")
    p.add_argument("--familles", type=int, default=10)
    p.add_argument("--total", type=int, default=1000)
    p.add_argument("--par-famille", type=int)
    p.add_argument("--signature", type=int, default=4)
    p.add_argument("--bruit", type=int, default=40)
    p.add_argument("--flip", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=42)
    _options_communes(p)
    return parseur


def config_depuis_arguments(args):
    surcharges = {nom: getattr(args, nom, None) for _, nom, _ in _OPTIONS_CONFIG}
    surcharges["seed"] = getattr(args, "seed", None)
    surcharges["transitive_closure"] = getattr(args, "transitive_closure", None)
    return resoudre_config(getattr(args, "config", None), surcharges)


def spec_depuis_arguments(args):
    options = dict(taille_signature=args.signature, n_tokens_bruit=args.bruit,
                   taux_flip=args.flip, seed=args.seed)
    if args.par_famille:
        return SyntheticSpec.uniforme(args.familles, args.par_famille, **options)
    return SyntheticSpec.proportions_drebin(args.total, args.familles, **options)


def executer(args):
    if args.commande == "synth":
        cmd_synth(spec_depuis_arguments(args), args.out)
    elif args.commande == "predict":
        cmd_predict(args.modele, args.entree, args.out, args.labels)
    else:
        config = config_depuis_arguments(args)
        if args.commande == "extract":
            cmd_extract(args.corpus, config, args.out, args.labels,
                        args.api_ranking_csv, args.edges_dir)
        elif args.commande == "train":
            cmd_train(args.dataset, config, args.out, args.importances_csv, args.clusters_csv)
        elif args.commande == "evaluate":
            cmd_evaluate(args.dataset, config, args.out)
        elif args.commande == "sweep":
            cmd_sweep(args.dataset, config, args.out)


def main(argv=None):
    try:
        args = construire_parseur().parse_args(argv)
        configurer_journal(args.log_level)
        executer(args)
        return 0
    except ErreurFamDroid as e:
        print(f"\n✖ Erreur: {e}", file=sys.stderr)
        return e.code_sortie
    except KeyboardInterrupt:
        print("\n\n✖ Interruption par l'utilisateur", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"\n✖ Erreur interne: {e}", file=sys.stderr)
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
