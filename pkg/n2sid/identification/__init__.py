from .n2sid import *
from .n4sid import *
