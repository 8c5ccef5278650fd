"""
gumbel_phcs
~~~~~~~~~~~

Estimation for the Gumbel type-II distribution under adaptive type-II progressive hybrid censoring.

Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE
"""

from .bayes import *
from .censoring import *
from .datasets import *
from .enums import *
from .errors import *
from .gof import *
from .intervals import *
from .mle import *
from .models import *
from .mps import *
from .sim import *
