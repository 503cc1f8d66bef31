#!/usr/bin/env python3
"""
Module des métriques d'évaluation : accuracy, précision / rappel / F1 macro,
précision par famille et matrice de confusion (lignes = vraies familles)
"""
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from sklearn.metrics import confusion_matrix

from src.erreurs import LongueursIncompatibles


@dataclass(frozen=True)
class MetriquesFamille:
    family: str
    precision: float
    recall: float
    f1: float
    support: int
    precision_indefinie: bool = False
    rappel_indefini: bool = False

    @property
    def accuracy(self):
        """Part des échantillons de la famille correctement classés (= rappel)."""
        return self.recall


@dataclass(frozen=True, eq=False)
class EvalReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_f1_moyenne: float
    per_family: List[MetriquesFamille]
    confusion: np.ndarray
    families: Tuple[str, ...]
    accuracy_globale: float = field(default=None)

    @property
    def n(self):
        return int(self.confusion.sum())

    def en_dict(self):
        return {
            "accuracy": self.accuracy,
            "accuracy_globale": self.accuracy_globale,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "macro_f1_moyenne": self.macro_f1_moyenne,
            "families": list(self.families),
            "per_family": [
                {
                    "family": m.family,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                    "precision_indefinie": m.precision_indefinie,
                    "rappel_indefini": m.rappel_indefini,
                }
                for m in self.per_family
            ],
            "confusion": self.confusion.astype(int).tolist(),
        }


def moyenne_harmonique(p, r):
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def _rapport_depuis_confusion(confusion, familles):
    confusion = np.asarray(confusion, dtype=np.int64)
    vrais_positifs = np.diag(confusion).astype(np.float64)
    predits = confusion.sum(axis=0)
    supports = confusion.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predits > 0, vrais_positifs / np.maximum(predits, 1), 0.0)
        rappel = np.where(supports > 0, vrais_positifs / np.maximum(supports, 1), 0.0)
    f1 = np.array([moyenne_harmonique(p, r) for p, r in zip(precision, rappel)])
    par_famille = [
        MetriquesFamille(
            family=f,
            precision=float(precision[i]),
            recall=float(rappel[i]),
            f1=float(f1[i]),
            support=int(supports[i]),
            precision_indefinie=bool(predits[i] == 0),
            rappel_indefini=bool(supports[i] == 0),
        )
        for i, f in enumerate(familles)
    ]
    total = confusion.sum()
    globale = float(np.trace(confusion) / total) if total else 0.0
    macro_p = float(np.mean(precision)) if len(familles) else 0.0
    macro_r = float(np.mean(rappel)) if len(familles) else 0.0
    return EvalReport(
        accuracy=globale,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=moyenne_harmonique(macro_p, macro_r),
        macro_f1_moyenne=float(np.mean(f1)) if len(familles) else 0.0,
        per_family=par_famille,
        confusion=confusion,
        families=tuple(familles),
        accuracy_globale=globale,
    )


def compute_metrics(vrais, predits, families):
    """
    Rapport complet : précision = TP / (TP + FP), rappel = TP / (TP + FN), 0 et
    signalés quand le dénominateur est nul ; F1 macro = moyenne harmonique de la
    précision macro et du rappel macro.
    """
    vrais = list(vrais)
    predits = list(predits)
    if len(vrais) != len(predits):
        raise LongueursIncompatibles(f"{len(vrais)} vraies familles pour {len(predits)} prédictions")
    familles = list(families)
    familles.extend(sorted((set(vrais) | set(predits)) - set(familles)))
    confusion = confusion_matrix(vrais, predits, labels=familles) if vrais else \
        np.zeros((len(familles), len(familles)), dtype=np.int64)
    return _rapport_depuis_confusion(confusion, familles)


def moyenne_rapports(rapports):
    """
    Rapport moyen : moyenne des métriques des plis, matrices de confusion
    sommées ; métriques par famille et accuracy_globale tirées de la somme.
    """
    if not rapports:
        raise ValueError("aucun rapport à moyenner")
    familles = rapports[0].families
    confusion = sum(r.confusion for r in rapports)
    pooled = _rapport_depuis_confusion(confusion, familles)
    return EvalReport(
        accuracy=float(np.mean([r.accuracy for r in rapports])),
        macro_precision=float(np.mean([r.macro_precision for r in rapports])),
        macro_recall=float(np.mean([r.macro_recall for r in rapports])),
        macro_f1=float(np.mean([r.macro_f1 for r in rapports])),
        macro_f1_moyenne=float(np.mean([r.macro_f1_moyenne for r in rapports])),
        per_family=pooled.per_family,
        confusion=confusion,
        families=familles,
        accuracy_globale=pooled.accuracy_globale,
    )


def tableau_texte(lignes):
    """Tableau texte 'modèle / ACC / F1', une ligne par (nom, rapport)."""
    largeur = max([len("Model")] + [len(nom) for nom, _ in lignes])
    sortie = [f"{'Model':<{largeur}}  {'ACC':>7}  {'F1':>7}"]
    for nom, rapport in lignes:
        sortie.append(f"{nom:<{largeur}}  {rapport.accuracy * 100:6.2f}%  {rapport.macro_f1 * 100:6.2f}%")
    return "\n".join(sortie)
