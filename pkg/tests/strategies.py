"""Hypothesis strategies for phase points."""

import numpy as np
from hypothesis import assume
from hypothesis import strategies as st

from kepler_orbit.orbit_core import PhasePoint

coord = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(coord, coord, coord).map(np.array)


@st.composite
def phase_points(draw, p_min=0.1):
    x = draw(vec3)
    p = draw(vec3)
    assume(np.linalg.norm(p) >= p_min)
    return PhasePoint(x, p)
