__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.model import StateSpaceModel, IoBatch
from n2sid.identification.n2sid import N2SID
from n2sid.identification.n4sid import N4SID
