#!/usr/bin/env python3
"""
Configuration du journal (module logging) pour les commandes en ligne
"""
import logging

FORMAT_JOURNAL = "%(asctime)s %(levelname)s %(name)s: %(message)s"
NIVEAUX = ("DEBUG", "INFO", "WARNING", "ERROR")


def configurer_journal(niveau="INFO"):
    """
    Configure le logger racine une seule fois (sortie d'erreur standard).
    Un nouvel appel ne fait que changer le niveau.
    """
    niveau = (niveau or "INFO").upper()
    if niveau not in NIVEAUX:
        niveau = "INFO"
    racine = logging.getLogger()
    if not racine.handlers:
        logging.basicConfig(level=niveau, format=FORMAT_JOURNAL)
    racine.setLevel(niveau)
    return racine
