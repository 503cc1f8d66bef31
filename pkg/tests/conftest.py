import logging

import pytest

from tests.donneesTest import CORPUS_FIXTURE, donnees_plantees


@pytest.fixture
def corpus_fixture():
    return CORPUS_FIXTURE


@pytest.fixture(scope="module")
def jeu_plante():
    """Quatre familles de 30 lignes, trois colonnes propres par famille."""
    return donnees_plantees()


@pytest.fixture(autouse=True)
def journal_silencieux(caplog):
    caplog.set_level(logging.WARNING)
