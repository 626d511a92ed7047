"""Generalized Naive Bayes classifiers: GNB-A and GNB-O structure learning with NB and TAN baselines."""

__version__ = "0.1.0"

from .classify import GnbModel, Posterior, classify, classify_table, fit, joint
from .data import DataError, DiscreteTable, RawTable, discretize, load_csv, split
from .empirical import Entropies, structure_weight_gnb, structure_weight_nb
from .learn import learn, learn_gnb_a, learn_gnb_o, learn_nb, learn_tan
from .structure import GnbStructure, NbStructure

__all__ = [
    "DataError", "DiscreteTable", "Entropies", "GnbModel", "GnbStructure", "NbStructure", "Posterior",
    "RawTable", "classify", "classify_table", "discretize", "fit", "joint", "learn", "learn_gnb_a",
    "learn_gnb_o", "learn_nb", "learn_tan", "load_csv", "split", "structure_weight_gnb",
    "structure_weight_nb",
]
