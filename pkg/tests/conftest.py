import math

from hypothesis import settings

from translab.exact import GrimProfile

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")

LN2, LN4, LN8 = math.log(2), math.log(4), math.log(8)
GRIM = GrimProfile(A=1.0, B=math.pi / 2)
