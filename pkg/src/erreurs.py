#!/usr/bin/env python3
"""
Exceptions du projet FamDroid
Deux familles : erreurs d'usage (code de sortie 1) et erreurs de données (code 2)
"""


class ErreurFamDroid(Exception):
    """Racine de toutes les erreurs levées volontairement par le projet."""
    code_sortie = 3


class ErreurUsage(ErreurFamDroid):
    code_sortie = 1


class ErreurDonnees(ErreurFamDroid):
    code_sortie = 2


class ConfigInvalide(ErreurUsage):
    pass


class ManifesteMalforme(ErreurDonnees):
    pass


class ManifesteManquant(ErreurDonnees):
    pass


class CorpusVide(ErreurDonnees):
    pass


class EtiquettesDegenerees(ErreurDonnees):
    """Moins de deux familles là où un apprentissage en demande au moins deux."""


class FamilleTropPetite(ErreurDonnees):
    def __init__(self, famille, effectif, minimum):
        super().__init__(
            f"famille '{famille}' : {effectif} échantillon(s), {minimum} requis"
        )
        self.famille = famille
        self.effectif = effectif
        self.minimum = minimum


class DimensionIncompatible(ErreurDonnees):
    pass


class TropPeuEchantillons(ErreurDonnees):
    pass


class LongueursIncompatibles(ErreurDonnees):
    pass


class BundleCorrompu(ErreurDonnees):
    pass


class CibleNonVide(ErreurDonnees):
    pass


class FormatInvalide(ErreurDonnees):
    pass


class EtiquettesIllisibles(ErreurDonnees):
    """Fichier d'étiquettes absent, illisible ou mal encodé"""
