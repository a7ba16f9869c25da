from .spectrum import *
from .raman import *
from .noise import *
from .nli import *
from .oracle import *
from .metrics import *
from .optimizer import *
from .conf import *
from .report import *

__version__ = "0.1.0"
