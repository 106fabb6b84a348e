__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

"""
Enumerations shared across the identification methods, studies and reports.
"""

from enum import Enum


class TypeIdentification(str, Enum):
    NONE = "not defined"
    N2SID = "nuclear norm subspace identification"
    N4SID = "oblique projection subspace identification"


class TypeStudy(str, Enum):
    OPEN_LOOP = "open_loop"
    CLOSED_LOOP = "closed_loop"


class TypeFitMode(str, Enum):
    """
    How the fit of a model on a data set is evaluated
    """

    PREDICTION = "prediction"  # one-step-ahead observer driven by u and y
    SIMULATION = "simulation"  # free run driven by u only


class TypeLambdaSelection(str, Enum):
    """
    Data set on which the regularization parameter is selected
    """

    IDENTIFICATION = "identification"
    VALIDATION = "validation"
