#!/usr/bin/env python3
"""
Module d'extraction des caractéristiques explicites d'un AndroidManifest.xml décodé
(sortie texte d'Apktool) : permissions, matériel, composants, filtres d'intentions
"""
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import FrozenSet, Tuple

from src.erreurs import ManifesteMalforme, ManifesteManquant

ANDROID_NS = "http://schemas.android.com/apk/res/android"
ATTR_NOM = f"{{{ANDROID_NS}}}name"

TYPES_COMPOSANTS = ("activity", "service", "receiver", "provider")

# Préfixes des jetons de caractéristiques (le type se déduit du préfixe)
PREFIXE_PERMISSION = "perm:"
PREFIXE_MATERIEL = "hw:"
PREFIXE_INTENTION = "intent:"


@dataclass(frozen=True)
class ManifestFacts:
    permissions: FrozenSet[str] = field(default_factory=frozenset)
    hardware: FrozenSet[str] = field(default_factory=frozenset)
    components: FrozenSet[Tuple[str, str]] = field(default_factory=frozenset)
    intent_filters: FrozenSet[str] = field(default_factory=frozenset)

    def comptes(self):
        return (
            len(self.permissions),
            len(self.hardware),
            len(self.components),
            len(self.intent_filters),
        )

    def tokens(self):
        """Jetons de caractéristiques du manifeste, triés."""
        jetons = {PREFIXE_PERMISSION + p for p in self.permissions}
        jetons |= {PREFIXE_MATERIEL + h for h in self.hardware}
        jetons |= {f"{type_}:{nom}" for type_, nom in self.components}
        jetons |= {PREFIXE_INTENTION + i for i in self.intent_filters}
        return sorted(jetons)


def _nom_element(element):
    """
    Nom déclaré d'un élément : attribut android:name, ou name sans espace de noms
    pour les manifestes réécrits à la main. Chaîne vide si absent.
    """
    nom = element.attrib.get(ATTR_NOM)
    if nom is None:
        nom = element.attrib.get("name", "")
    return (nom or "").strip()


def _balise(element):
    """Nom local de la balise (sans espace de noms éventuel)."""
    tag = element.tag
    if isinstance(tag, str) and tag.startswith("{"):
        return tag.split("}", 1)[1]
    return tag


def parse_manifest(xml_text):
    """
    Extrait les faits du manifeste : uses-permission, uses-feature, les 4 types de
    composants et les actions/catégories de tous les intent-filter du document.
    Lève ManifesteMalforme si le XML ne se lit pas.
    """
    try:
        racine = ET.fromstring(xml_text)
    except ET.ParseError as e:
        raise ManifesteMalforme(f"XML illisible : {e}") from e

    permissions = set()
    materiel = set()
    composants = set()
    intentions = set()

    for element in racine.iter():
        balise = _balise(element)
        if balise in ("uses-permission", "uses-permission-sdk-23"):
            nom = _nom_element(element)
            if nom:
                permissions.add(nom)
        elif balise == "uses-feature":
            nom = _nom_element(element)
            if nom:
                materiel.add(nom)
        elif balise in TYPES_COMPOSANTS:
            nom = _nom_element(element)
            if nom:
                composants.add((balise, nom))
        elif balise == "intent-filter":
            # Actions et catégories uniquement, les éléments data sont ignorés
            for enfant in element:
                if _balise(enfant) in ("action", "category"):
                    nom = _nom_element(enfant)
                    if nom:
                        intentions.add(nom)

    return ManifestFacts(
        permissions=frozenset(permissions),
        hardware=frozenset(materiel),
        components=frozenset(composants),
        intent_filters=frozenset(intentions),
    )


def lire_manifest(chemin):
    """Lit et analyse un fichier AndroidManifest.xml décodé."""
    try:
        with open(chemin, "r", encoding="utf-8") as f:
            texte = f.read()
    except FileNotFoundError as e:
        raise ManifesteManquant(f"manifeste absent : {chemin}") from e
    except (OSError, UnicodeDecodeError) as e:
        raise ManifesteMalforme(f"manifeste illisible : {chemin} ({e})") from e
    return parse_manifest(texte)
