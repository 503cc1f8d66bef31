#!/usr/bin/env python3
"""
Module d'ingestion d'un corpus décompilé
Un sous-dossier par application : AndroidManifest.xml + arborescence smali/
"""
import logging
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import Optional, Tuple

from src.data.parseurManifest import ManifestFacts, lire_manifest
from src.data.parseurSmali import MethodInvocations, parse_smali_dir
from src.erreurs import CorpusVide, EtiquettesIllisibles, ManifesteMalforme, ManifesteManquant

logger = logging.getLogger(__name__)

NOM_MANIFESTE = "AndroidManifest.xml"
DOSSIER_SMALI = "smali"


@dataclass(frozen=True)
class AppSample:
    id: str
    family: Optional[str]
    manifest: ManifestFacts
    methods: Tuple[MethodInvocations, ...]

    def apis(self):
        """Ensemble des API invoquées au moins une fois."""
        return {api for m in self.methods for api in m.invocations}


def lire_etiquettes(fichier):
    """
    Lit le fichier d'étiquettes : une ligne "app_id<TAB>famille", commentaires #.
    Retourne un dictionnaire id -> famille.
    """
    etiquettes = {}
    if not fichier:
        return etiquettes
    try:
        with open(fichier, "r", encoding="utf-8") as f:
            lignes = f.readlines()
    except (OSError, UnicodeDecodeError) as e:
        raise EtiquettesIllisibles(f"fichier d'étiquettes '{fichier}' illisible : {e}") from e
    for numero, ligne in enumerate(lignes, 1):
        ligne = ligne.strip()
        if not ligne or ligne.startswith("#"):
            continue
        if "\t" not in ligne:
            logger.warning("Ligne %d ignorée (pas de tabulation) : %r", numero, ligne)
            continue
        app_id, famille = ligne.split("\t", 1)
        app_id, famille = app_id.strip(), famille.strip()
        if not app_id or not famille:
            logger.warning("Ligne %d ignorée (champ vide)", numero)
            continue
        etiquettes[app_id] = famille
    return etiquettes


def ecrire_etiquettes(etiquettes, fichier):
    """Écrit un fichier d'étiquettes trié par identifiant."""
    with open(fichier, "w", encoding="utf-8", newline="\n") as f:
        for app_id in sorted(etiquettes):
            f.write(f"{app_id}\t{etiquettes[app_id]}\n")


def analyser_application(dossier, family=None):
    """
    Construit l'AppSample d'un dossier d'application.
    Lève ManifesteManquant / ManifesteMalforme, que l'appelant transforme en saut.
    """
    dossier = Path(dossier)
    chemin_manifeste = dossier / NOM_MANIFESTE
    if not chemin_manifeste.is_file():
        raise ManifesteManquant(f"{chemin_manifeste} introuvable")
    manifeste = lire_manifest(chemin_manifeste)
    methodes = parse_smali_dir(dossier / DOSSIER_SMALI)
    return AppSample(
        id=dossier.name,
        family=family,
        manifest=manifeste,
        methods=tuple(methodes),
    )


def _analyser_ou_ignorer(args):
    dossier, famille = args
    try:
        return analyser_application(dossier, famille)
    except ManifesteManquant as e:
        logger.warning("Application ignorée (manifeste manquant) : %s", e)
    except ManifesteMalforme as e:
        logger.warning("Application ignorée (manifeste malformé) %s : %s", dossier, e)
    return None


def lister_applications(root):
    """Sous-dossiers d'applications, dans l'ordre lexicographique des identifiants."""
    root = Path(root)
    if not root.is_dir():
        raise CorpusVide(f"'{root}' n'est pas un dossier")
    return sorted((d for d in root.iterdir() if d.is_dir()), key=lambda d: d.name)


def ingest_corpus(root, labels=None, n_jobs=1):
    """
    Ingère tout un corpus : retourne la liste des AppSample triée par identifiant.
    labels peut être un chemin de fichier d'étiquettes ou un dictionnaire déjà lu.
    Les applications absentes des étiquettes ont family = None.
    """
    if isinstance(labels, dict):
        etiquettes = labels
    else:
        etiquettes = lire_etiquettes(labels)

    dossiers = lister_applications(root)
    if not dossiers:
        raise CorpusVide(f"aucune application dans '{root}'")

    taches = [(d, etiquettes.get(d.name)) for d in dossiers]
    if n_jobs and n_jobs > 1:
        with Pool(processes=n_jobs) as pool:
            resultats = pool.map(_analyser_ou_ignorer, taches, chunksize=8)
    else:
        resultats = [_analyser_ou_ignorer(t) for t in taches]

    echantillons = [r for r in resultats if r is not None]
    if not echantillons:
        raise CorpusVide(f"aucune application lisible dans '{root}'")

    ignores = len(dossiers) - len(echantillons)
    etiquetes = sum(1 for e in echantillons if e.family is not None)
    logger.info(
        "%d applications ingérées (%d étiquetées, %d ignorées)",
        len(echantillons), etiquetes, ignores,
    )
    return echantillons
