"""Two linear limit states in standard normal space.

The second hyperplane is the first one rotated by an angle theta.  At
theta = 0 both coincide, at 180 they face opposite ways.  We follow the
first-order index of U2 for the two components, their series system and
their parallel system.

Run: python demos/01_two_linear_components.py
"""

import math

import numpy as np

from formsens import MvnOptions, SystemDefinition, first_order_index, linear_system

mvn = MvnOptions(n_samples=10**5)  # small budget, enough for two digits
beta = (2.0, 2.0)


def alphas(theta_deg):
    t = math.radians(theta_deg)
    a1 = np.array([1.0, 1.0]) / math.sqrt(2)
    a2 = np.array([math.cos(t) - math.sin(t), math.cos(t) + math.sin(t)]) / math.sqrt(2)
    return a1, a2


print("theta   comp.1   comp.2   series   parallel   (first-order index of U2)")
for theta in range(0, 180, 15):
    a1, a2 = alphas(theta)
    row = []
    for a, b in ((a1, beta[0]), (a2, beta[1])):
        ls = linear_system([a], [b], SystemDefinition.component())
        row.append(first_order_index(ls, 1).value)
    for system in (SystemDefinition.series(2), SystemDefinition.parallel(2)):
        ls = linear_system([a1, a2], beta, system)
        row.append(first_order_index(ls, 1, mvn=mvn).value)
    print(f"{theta:5d}  " + "  ".join(f"{v:7.4f}" for v in row))

# At theta = 0 all four columns coincide.  Component 2 puts all of its
# weight on U2 at 45 degrees and none at 135; both system columns stay
# between the two component curves for most angles.
