#!/usr/bin/env python3
"""
Module d'analyse des fichiers smali (sortie d'Apktool)
Découpe chaque fichier en méthodes et relève, dans l'ordre du texte, les API
appelées par les instructions invoke-*
"""
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

logger = logging.getLogger(__name__)

FORMES_INVOKE = ("virtual", "super", "direct", "static", "interface")

# invoke-<forme>[/range] {registres}, Lpkg/Classe;->methode(Args)Ret
RE_INVOKE = re.compile(
    r"^\s*invoke-(" + "|".join(FORMES_INVOKE) + r")(/range)?\s+"
    r"\{[^}]*\}\s*,\s*"
    r"(L[\w/$]+;)->([\w<>$]+)(\([^)\s]*\)\S+)\s*$"
)
RE_API_CANONIQUE = re.compile(r"L[\w/$]+;->[\w<>$]+\(.*\).*")

# Alias de type : une API est désignée par sa chaîne canonique
ApiId = str


@dataclass(frozen=True)
class MethodInvocations:
    method_id: str
    invocations: Tuple[ApiId, ...]


def canonicaliser_api(classe, methode, descripteur):
    """Chaîne canonique unique pour un triplet (classe, méthode, descripteur)."""
    return f"{classe.strip()}->{methode.strip()}{''.join(descripteur.split())}"


def analyser_invoke(ligne):
    """Retourne l'ApiId ciblée par une ligne invoke-*, ou None."""
    m = RE_INVOKE.match(ligne)
    if not m:
        return None
    return canonicaliser_api(m.group(3), m.group(4), m.group(5))


def parse_smali_text(texte, nom_fichier="<texte>"):
    """
    Découpe un texte smali en blocs .method ... .end method.
    Un bloc tronqué (fin de fichier ou nouvelle .method avant .end method)
    conserve les appels déjà relevés.
    """
    methodes = []
    classe = ""
    methode_courante = None
    appels = []

    def clore(tronque):
        if tronque:
            logger.warning("Méthode tronquée %s dans %s", methode_courante, nom_fichier)
        methodes.append(MethodInvocations(methode_courante, tuple(appels)))

    for ligne in texte.splitlines():
        brute = ligne.strip()
        if brute.startswith(".class"):
            classe = brute.split()[-1]
        elif brute.startswith(".method"):
            if methode_courante is not None:
                clore(tronque=True)
            morceaux = brute.split()
            signature = morceaux[-1] if len(morceaux) > 1 else ""
            methode_courante = f"{classe}->{signature}"
            appels = []
        elif brute.startswith(".end method"):
            if methode_courante is not None:
                clore(tronque=False)
            methode_courante = None
            appels = []
        elif methode_courante is not None and brute.startswith("invoke-"):
            api = analyser_invoke(brute)
            if api is not None:
                appels.append(api)
            else:
                logger.debug("Invoke non reconnu dans %s : %s", nom_fichier, brute)

    if methode_courante is not None:
        clore(tronque=True)
    return methodes


def lister_fichiers_smali(racine):
    """Fichiers .smali sous racine, triés par chemin relatif (ordre déterministe)."""
    racine = Path(racine)
    if not racine.is_dir():
        return []
    return sorted(
        (p for p in racine.rglob("*.smali") if p.is_file()),
        key=lambda p: p.relative_to(racine).as_posix(),
    )


def parse_smali_dir(root):
    """
    Toutes les méthodes de tous les fichiers .smali sous root.
    Un fichier illisible est ignoré (journalisé), l'analyse continue.
    """
    methodes = []
    for chemin in lister_fichiers_smali(root):
        try:
            texte = chemin.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            logger.warning("Fichier smali illisible ignoré : %s (%s)", chemin, e)
            continue
        methodes.extend(parse_smali_text(texte, nom_fichier=str(chemin)))
    return methodes
