#!/usr/bin/env python3
"""
Module de génération d'un corpus synthétique au format d'Apktool
Chaque famille reçoit une signature disjointe (permissions, services, actions
d'intention, chaîne d'API) ; un bruit commun et des appels internes à
l'application s'y mêlent. Les étiquettes peuvent être bruitées (taux_flip).
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from src.data.ingestionCorpus import DOSSIER_SMALI, NOM_MANIFESTE, ecrire_etiquettes
from src.erreurs import CibleNonVide, ConfigInvalide
from src.features.gainInformation import PREFIXES_API_DEFAUT
from src.graph.grapheAppels import jeton_relation
from src.pipeline.configPipeline import graine_etape

logger = logging.getLogger(__name__)

# Effectifs des dix plus grandes familles de Drebin
FAMILLES_DREBIN = (
    ("FakeInstaller", 898),
    ("DroidKungFu", 665),
    ("Plankton", 623),
    ("Opfake", 590),
    ("GinMaster", 338),
    ("BaseBridge", 323),
    ("Iconosys", 150),
    ("Kmin", 147),
    ("FakeDoc", 75),
    ("Geinimi", 92),
)
FICHIER_ETIQUETTES = "etiquettes.tsv"
FICHIER_ETIQUETTES_REELLES = "etiquettes_reelles.tsv"
FORMES_INVOKE = ("virtual", "static", "direct", "interface", "super")
TYPES_BRUIT = ("perm", "hw", "intent", "api")


def repartir_plus_forts_restes(poids, total):
    """Répartit total proportionnellement aux poids (méthode des plus forts restes)."""
    poids = np.asarray(poids, dtype=np.float64)
    quotas = poids * total / poids.sum()
    parts = np.floor(quotas).astype(np.int64)
    restes = quotas - parts
    manque = int(total - parts.sum())
    # égalités de restes : la famille la plus grande d'abord
    ordre = sorted(range(len(poids)), key=lambda i: (-restes[i], -poids[i], i))
    for i in ordre[:manque]:
        parts[i] += 1
    return [int(p) for p in parts]


def noms_familles(n):
    noms = [nom for nom, _ in FAMILLES_DREBIN[:n]]
    noms += [f"Famille{i:02d}" for i in range(len(noms), n)]
    return noms


@dataclass(frozen=True)
class SyntheticSpec:
    familles: Tuple[str, ...] = field(default_factory=lambda: noms_familles(10))
    tailles: Tuple[int, ...] = field(
        default_factory=lambda: tuple(repartir_plus_forts_restes([n for _, n in FAMILLES_DREBIN], 1000))
    )
    taille_signature: int = 4
    n_tokens_bruit: int = 40
    taux_flip: float = 0.05
    p_presence: float = 0.85
    p_bruit: float = 0.3
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "familles", tuple(self.familles))
        object.__setattr__(self, "tailles", tuple(int(t) for t in self.tailles))
        if len(self.familles) != len(self.tailles) or not self.familles:
            raise ConfigInvalide("une taille par famille attendue")
        if len(set(self.familles)) != len(self.familles):
            raise ConfigInvalide("noms de familles en double")
        if min(self.tailles) < 1:
            raise ConfigInvalide("chaque famille doit compter au moins un échantillon")
        if self.taille_signature < 0 or self.n_tokens_bruit < 0:
            raise ConfigInvalide("taille_signature et n_tokens_bruit doivent être >= 0")
        for nom in ("taux_flip", "p_presence", "p_bruit"):
            if not 0.0 <= getattr(self, nom) <= 1.0:
                raise ConfigInvalide(f"{nom} doit être dans [0, 1]")
        if self.taux_flip > 0 and len(self.familles) < 2:
            raise ConfigInvalide("le bruit d'étiquettes demande au moins deux familles")

    @classmethod
    def proportions_drebin(cls, n_total=1000, n_familles=10, **options):
        """Familles de Drebin (puis FamilleNN) aux proportions de leurs effectifs."""
        poids = [n for _, n in FAMILLES_DREBIN[:n_familles]]
        poids += [min(poids) if poids else 1] * (n_familles - len(poids))
        return cls(familles=tuple(noms_familles(n_familles)),
                   tailles=tuple(repartir_plus_forts_restes(poids, n_total)), **options)

    @classmethod
    def uniforme(cls, n_familles, par_famille, **options):
        return cls(familles=tuple(noms_familles(n_familles)),
                   tailles=(par_famille,) * n_familles, **options)

    @property
    def n_total(self):
        return sum(self.tailles)


@dataclass(frozen=True)
class ResultatSynthese:
    ids: Tuple[str, ...]
    familles_reelles: Dict[str, str]
    familles_observees: Dict[str, str]
    tokens_attendus: Dict[str, Tuple[str, ...]]

    def univers(self):
        """Ensemble de tous les jetons attendus sur le corpus."""
        return sorted({t for jetons in self.tokens_attendus.values() for t in jetons})


@dataclass
class _Application:
    id: str
    paquet: str
    permissions: List[str] = field(default_factory=list)
    materiel: List[str] = field(default_factory=list)
    services: List[str] = field(default_factory=list)
    actions_recepteur: List[str] = field(default_factory=list)
    recepteur: str = ""
    actions_bruit: List[str] = field(default_factory=list)
    methodes: List[Tuple[str, List[Tuple[str, str]]]] = field(default_factory=list)


def _code_famille(index):
    return f"fam{index:02d}"


def signature_famille(index, taille):
    """Jetons plantés d'une famille : noms disjoints d'une famille à l'autre."""
    code = _code_famille(index)
    majuscule = code.upper()
    return {
        "perm": [f"android.permission.SYNTH_{majuscule}_P{i}" for i in range(taille)],
        "service": [f"com.synth.{code}.Service{i}" for i in range(taille)],
        "intent": [f"com.synth.{code}.ACTION_{i}" for i in range(taille)],
        "api": [f"Landroid/synth/{code}/Api{i};->appel{i}(I)V" for i in range(taille)],
        "recepteur": f"com.synth.{code}.Recepteur",
    }


def bruit_commun(n):
    """Réserve de bruit partagée par toutes les familles, types en alternance."""
    reserve = []
    for i in range(n):
        genre = TYPES_BRUIT[i % len(TYPES_BRUIT)]
        if genre == "perm":
            reserve.append((genre, f"android.permission.BRUIT_{i:03d}"))
        elif genre == "hw":
            reserve.append((genre, f"android.hardware.bruit{i:03d}"))
        elif genre == "intent":
            reserve.append((genre, f"android.intent.action.BRUIT_{i:03d}"))
        else:
            reserve.append((genre, f"Landroid/bruit/Outil{i:03d};->executer(Ljava/lang/String;)V"))
    return reserve


def _tirer(rng, elements, p):
    return [e for e, garde in zip(elements, rng.random(len(elements)) < p) if garde]


def _construire_application(rng, spec, app_id, index_famille, reserve):
    signature = signature_famille(index_famille, spec.taille_signature)
    paquet = f"com.synth.{app_id}"
    app = _Application(id=app_id, paquet=paquet)
    bruit = _tirer(rng, reserve, spec.p_bruit)

    app.permissions = _tirer(rng, signature["perm"], spec.p_presence) + \
        [nom for genre, nom in bruit if genre == "perm"]
    app.materiel = [nom for genre, nom in bruit if genre == "hw"]
    app.services = _tirer(rng, signature["service"], spec.p_presence)
    app.actions_recepteur = _tirer(rng, signature["intent"], spec.p_presence)
    if app.actions_recepteur:
        app.recepteur = signature["recepteur"]
    app.actions_bruit = [nom for genre, nom in bruit if genre == "intent"]

    interne = f"L{paquet.replace('.', '/')}/Principale;->aide()V"
    appels_signature = []
    for api in _tirer(rng, signature["api"], spec.p_presence):
        appels_signature.append(("static", api))
        if rng.random() < 0.3:
            appels_signature.append(("virtual", interne))
    apis_bruit = [nom for genre, nom in bruit if genre == "api"]
    appels_bruit = []
    for position, i in enumerate(rng.permutation(len(apis_bruit))):
        forme = FORMES_INVOKE[position % len(FORMES_INVOKE)]
        appels_bruit.append((forme, apis_bruit[i]))
    app.methodes = [
        ("constructor <init>()V", [("direct", "Landroid/app/Activity;-><init>()V")]),
        ("signature()V", appels_signature),
        ("bruit()V", appels_bruit),
        ("aide()V", []),
    ]
    return app


def tokens_application(app, prefixes=PREFIXES_API_DEFAUT):
    """Jetons attendus d'une application quand toutes les API candidates sont au vocabulaire."""
    jetons = {f"perm:{p}" for p in app.permissions}
    jetons |= {f"hw:{h}" for h in app.materiel}
    jetons.add(f"activity:{app.paquet}.Principale")
    jetons |= {f"service:{s}" for s in app.services}
    if app.recepteur:
        jetons.add(f"receiver:{app.recepteur}")
    jetons |= {f"intent:{a}" for a in app.actions_recepteur + app.actions_bruit}
    jetons |= {"intent:android.intent.action.MAIN", "intent:android.intent.category.LAUNCHER"}
    for _, appels in app.methodes:
        retenues = [api for _, api in appels if api.startswith(tuple(prefixes))]
        jetons |= {jeton_relation(a, b) for a, b in zip(retenues, retenues[1:])}
    return tuple(sorted(jetons))


def _xml_nom(balise, nom, indentation):
    return f'{" " * indentation}<{balise} android:name="{nom}"/>'


def manifeste_xml(app):
    lignes = [
        '<?xml version="1.0" encoding="utf-8" standalone="no"?>',
        '<manifest xmlns:android="http://schemas.android.com/apk/res/android" '
        f'package="{app.paquet}">',
    ]
    lignes += [_xml_nom("uses-permission", p, 4) for p in app.permissions]
    lignes += [_xml_nom("uses-feature", h, 4) for h in app.materiel]
    lignes.append(f'    <application android:label="{app.id}">')
    lignes.append(f'        <activity android:name="{app.paquet}.Principale">')
    lignes.append("            <intent-filter>")
    lignes.append(_xml_nom("action", "android.intent.action.MAIN", 16))
    lignes.append(_xml_nom("category", "android.intent.category.LAUNCHER", 16))
    lignes.append("            </intent-filter>")
    if app.actions_bruit:
        lignes.append("            <intent-filter>")
        lignes += [_xml_nom("action", a, 16) for a in app.actions_bruit]
        lignes.append("            </intent-filter>")
    lignes.append("        </activity>")
    lignes += [_xml_nom("service", s, 8) for s in app.services]
    if app.recepteur:
        lignes.append(f'        <receiver android:name="{app.recepteur}">')
        lignes.append("            <intent-filter>")
        lignes += [_xml_nom("action", a, 16) for a in app.actions_recepteur]
        lignes.append("            </intent-filter>")
        lignes.append("        </receiver>")
    lignes.append("    </application>")
    lignes.append("</manifest>")
    return "\n".join(lignes) + "\n"


def _instruction(forme, api, position):
    if position % 3 == 2:
        return f"    invoke-{forme}/range {{v0 .. v2}}, {api}"
    registres = "p0" if forme in ("virtual", "direct", "super", "interface") else "v0"
    return f"    invoke-{forme} {{{registres}}}, {api}"


def smali_principal(app):
    classe = f"L{app.paquet.replace('.', '/')}/Principale;"
    lignes = [
        f".class public {classe}",
        ".super Landroid/app/Activity;",
        '.source "Principale.java"',
        "",
    ]
    for signature, appels in app.methodes:
        lignes.append(f".method public {signature}")
        lignes.append("    .locals 3")
        for position, (forme, api) in enumerate(appels):
            lignes.append(_instruction(forme, api, position))
            lignes.append("")
        lignes.append("    return-void")
        lignes.append(".end method")
        lignes.append("")
    return "\n".join(lignes)


def _verifier_cible(cible):
    if os.path.exists(cible):
        if not os.path.isdir(cible) or os.listdir(cible):
            raise CibleNonVide(f"'{cible}' existe et n'est pas un dossier vide")


def _ecrire(chemin, texte):
    os.makedirs(os.path.dirname(chemin), exist_ok=True)
    with open(chemin, "w", encoding="utf-8", newline="\n") as f:
        f.write(texte)


def generer_corpus(spec, cible):
    """
    Écrit le corpus sous cible/<app_id>/ avec etiquettes.tsv (familles
    observées, bruitées) et etiquettes_reelles.tsv. Fonction pure de spec.
    """
    _verifier_cible(cible)
    rng = np.random.default_rng(graine_etape(spec.seed, "synth"))
    reserve = bruit_commun(spec.n_tokens_bruit)

    affectation = [i for i, taille in enumerate(spec.tailles) for _ in range(taille)]
    ordre = rng.permutation(len(affectation))
    ids, reelles, observees, attendus = [], {}, {}, {}
    for numero, position in enumerate(ordre):
        index_famille = affectation[position]
        app_id = f"app{numero:04d}"
        app = _construire_application(rng, spec, app_id, index_famille, reserve)
        famille = spec.familles[index_famille]
        observee = famille
        if spec.taux_flip > 0 and rng.random() < spec.taux_flip:
            autres = [f for f in spec.familles if f != famille]
            observee = autres[int(rng.integers(len(autres)))]

        dossier = os.path.join(cible, app_id)
        _ecrire(os.path.join(dossier, NOM_MANIFESTE), manifeste_xml(app))
        _ecrire(os.path.join(dossier, DOSSIER_SMALI, *app.paquet.split("."), "Principale.smali"),
                smali_principal(app))
        ids.append(app_id)
        reelles[app_id] = famille
        observees[app_id] = observee
        attendus[app_id] = tokens_application(app)

    ecrire_etiquettes(observees, os.path.join(cible, FICHIER_ETIQUETTES))
    ecrire_etiquettes(reelles, os.path.join(cible, FICHIER_ETIQUETTES_REELLES))
    inversees = sum(1 for i in ids if reelles[i] != observees[i])
    logger.info("Corpus synthétique : %d applications, %d familles, %d étiquette(s) bruitée(s)",
                len(ids), len(spec.familles), inversees)
    return ResultatSynthese(
        ids=tuple(ids),
        familles_reelles=reelles,
        familles_observees=observees,
        tokens_attendus=attendus,
    )
