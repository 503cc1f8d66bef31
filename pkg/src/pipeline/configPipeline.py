#!/usr/bin/env python3
"""
Module de configuration du pipeline FamDroid
Priorité croissante : valeurs par défaut < fichier JSON (--config) < options de ligne de commande
"""
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Tuple, Union

from src.erreurs import ConfigInvalide
from src.features.gainInformation import PREFIXES_API_DEFAUT

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))

ETAPES = ("vocabulaire", "foret", "importance", "ensemble", "plis", "synth")
CLASSEMENTS_API = ("gain", "forest")
MODES_IMPORTANCE = ("permutation", "bernoulli")
SWEEP_DEFAUT = "50,100,200,400,600,all"

_ENTIERS = (
    "api_vocab_size", "top_k_features", "n_trees", "tree_depth", "boost_rounds",
    "weak_depth", "n_folds", "min_family_support", "kmeans_max_iter", "n_jobs",
)


@dataclass(frozen=True)
class PipelineConfig:
    api_vocab_size: int = 7000
    top_k_features: int = 600
    k_clusters: Union[int, str] = 5
    n_trees: int = 100
    tree_depth: int = 16
    boost_rounds: int = 50
    weak_depth: int = 3
    n_folds: int = 5
    seed: int = 42
    api_prefixes: Tuple[str, ...] = field(default=PREFIXES_API_DEFAUT)
    min_family_support: int = 10
    api_ranking: str = "gain"
    transitive_closure: bool = False
    importance_mode: str = "permutation"
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-6
    n_jobs: int = 1
    sweep_top_k: str = SWEEP_DEFAUT

    def __post_init__(self):
        valider(self)

    def en_dict(self):
        data = dataclasses.asdict(self)
        data["api_prefixes"] = list(self.api_prefixes)
        return data

    def avec(self, **changements):
        return dataclasses.replace(self, **changements)

    def k_auto(self):
        return self.k_clusters == "auto"

    def valeurs_sweep(self):
        """Liste des top_k du balayage ; 'all' devient None (toutes les colonnes)."""
        valeurs = []
        for morceau in str(self.sweep_top_k).split(","):
            morceau = morceau.strip()
            if not morceau:
                continue
            if morceau == "all":
                valeurs.append(None)
                continue
            try:
                valeur = int(morceau)
            except ValueError:
                raise ConfigInvalide(f"sweep_top_k : valeur '{morceau}' invalide") from None
            if valeur < 1:
                raise ConfigInvalide("sweep_top_k : valeurs >= 1 attendues")
            valeurs.append(valeur)
        if not valeurs:
            raise ConfigInvalide("sweep_top_k vide")
        return valeurs


def valider(config):
    for nom in _ENTIERS:
        valeur = getattr(config, nom)
        if isinstance(valeur, bool) or not isinstance(valeur, int) or valeur < 1:
            raise ConfigInvalide(f"{nom} doit être un entier >= 1 (reçu {valeur!r})")
    k = config.k_clusters
    if k != "auto" and (isinstance(k, bool) or not isinstance(k, int) or k < 1):
        raise ConfigInvalide(f"k_clusters doit être un entier >= 1 ou 'auto' (reçu {k!r})")
    if isinstance(config.seed, bool) or not isinstance(config.seed, int) or config.seed < 0:
        raise ConfigInvalide(f"seed doit être un entier >= 0 (reçu {config.seed!r})")
    if config.api_ranking not in CLASSEMENTS_API:
        raise ConfigInvalide(f"api_ranking doit valoir {' ou '.join(CLASSEMENTS_API)}")
    if config.importance_mode not in MODES_IMPORTANCE:
        raise ConfigInvalide(f"importance_mode doit valoir {' ou '.join(MODES_IMPORTANCE)}")
    if not isinstance(config.kmeans_tol, (int, float)) or config.kmeans_tol < 0:
        raise ConfigInvalide("kmeans_tol doit être un réel >= 0")
    if not config.api_prefixes or not all(isinstance(p, str) and p for p in config.api_prefixes):
        raise ConfigInvalide("api_prefixes : liste de préfixes non vides attendue")


def _normaliser(valeurs):
    """Conversions de types depuis JSON ou argparse (listes, 'auto', chaînes)."""
    valeurs = dict(valeurs)
    if "api_prefixes" in valeurs:
        prefixes = valeurs["api_prefixes"]
        if isinstance(prefixes, str):
            prefixes = [p.strip() for p in prefixes.split(",") if p.strip()]
        valeurs["api_prefixes"] = tuple(prefixes)
    if isinstance(valeurs.get("k_clusters"), str) and valeurs["k_clusters"] != "auto":
        try:
            valeurs["k_clusters"] = int(valeurs["k_clusters"])
        except ValueError:
            raise ConfigInvalide(f"k_clusters invalide : {valeurs['k_clusters']!r}") from None
    if isinstance(valeurs.get("sweep_top_k"), list):
        valeurs["sweep_top_k"] = ",".join(str(v) for v in valeurs["sweep_top_k"])
    return valeurs


def depuis_dict(data, base=None):
    """Config à partir d'un dictionnaire ; clé inconnue -> ConfigInvalide."""
    connus = {f.name for f in dataclasses.fields(PipelineConfig)}
    inconnus = sorted(set(data) - connus)
    if inconnus:
        raise ConfigInvalide(f"clé(s) de configuration inconnue(s) : {', '.join(inconnus)}")
    base = base or PipelineConfig()
    try:
        return dataclasses.replace(base, **_normaliser(data))
    except TypeError as e:
        raise ConfigInvalide(str(e)) from e


def charger_config(fichier, base=None):
    """Lit un fichier JSON de configuration (chemin relatif : essayé aussi sous data/)."""
    if not os.path.isabs(fichier) and not os.path.exists(fichier):
        candidat = os.path.join(PROJECT_ROOT, "data", fichier)
        if os.path.exists(candidat):
            fichier = candidat
    try:
        with open(fichier, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigInvalide(f"fichier de configuration '{fichier}' introuvable") from None
    except json.JSONDecodeError as e:
        raise ConfigInvalide(f"configuration JSON illisible ({fichier}) : {e}") from e
    if not isinstance(data, dict):
        raise ConfigInvalide("la configuration JSON doit être un objet")
    return depuis_dict(data, base)


def resoudre_config(fichier=None, surcharges=None):
    """Défauts, puis fichier, puis surcharges (les valeurs None sont ignorées)."""
    config = PipelineConfig()
    if fichier:
        config = charger_config(fichier, config)
    if surcharges:
        config = depuis_dict({k: v for k, v in surcharges.items() if v is not None}, config)
    return config


def graine_etape(seed, etape):
    """Graine fille d'une étape : 8 premiers octets de SHA-256("<seed>:<etape>")."""
    if etape not in ETAPES:
        raise ValueError(f"étape inconnue : {etape}")
    empreinte = hashlib.sha256(f"{seed}:{etape}".encode("utf-8")).digest()
    return int.from_bytes(empreinte[:8], "little")


def graine_pli(seed, pli):
    """Graine d'un pli de validation croisée, dérivée de l'étape 'plis'."""
    empreinte = hashlib.sha256(f"{graine_etape(seed, 'plis')}:{pli}".encode("utf-8")).digest()
    return int.from_bytes(empreinte[:8], "little")
