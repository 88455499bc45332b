"""Five hand-built QA items with predictions, and their metric values worked out by hand."""

from __future__ import annotations

import math

from acr.agent import Decision
from acr.evalx import QAItem

OPTIONS = {
    "option 1": "the serving network collects charging data",
    "option 2": "paging cycle",
    "option 3": "handover",
}

GOLD = [
    QAItem("m1", "q1", OPTIONS, "option 1", OPTIONS["option 1"], "serving network collects charging data"),
    QAItem("m2", "q2", OPTIONS, "option 2", OPTIONS["option 2"], "alpha beta"),
    QAItem("m3", "q3", OPTIONS, "option 3", OPTIONS["option 3"], "paging cycle handover"),
    QAItem("m4", "q4", OPTIONS, "option 1", OPTIONS["option 1"], ""),
    QAItem("m5", "q5", OPTIONS, "option 2", OPTIONS["option 2"], "delta"),
]

PRED = [
    Decision("option 1", OPTIONS["option 1"], "the serving network collects data", 0.9),
    Decision("option 2", OPTIONS["option 2"], "gamma delta", 0.8),
    Decision("option 3", OPTIONS["option 3"], "paging cycle", 0.7),
    Decision("option 2", OPTIONS["option 2"], "", 0.6),
    Decision("option 3", OPTIONS["option 3"], "delta delta", 0.5),
]

# 3 of 5 labels agree
ACCURACY = 0.6

# answer texts: identical on m1..m3; m4 and m5 share no token with gold
TOKEN_F1 = [1.0, 1.0, 1.0, 0.0, 0.0]

# explanation token F1, by hand: overlap 4 of 5 on each side gives 0.8
EXPLANATION_TOKEN_F1 = [0.8, 0.0, 0.8, 1.0, 2 / 3]

# Stub slots at dim 64: the 60-, serving 7+, network 5+, collects 38-, data 5+,
# charging 34-, paging 33+, cycle 17+, handover 10-, alpha 43+, beta 39+,
# gamma 42-, delta 1+. "network" and "data" collide in slot 5.
#
# m1: each side holds 2 in slot 5 and +-1 in three other slots (squared norm 7);
#     they share slots 5, 7 and 38, so cosine = (4 + 1 + 1) / 7
# m3: 2 / (sqrt 2 * sqrt 3); m4: zero vectors give 0; m5: same direction
EXPLANATION_COSINE = [6 / 7, 0.0, 2 / math.sqrt(6), 0.0, 1.0]

# greedy matching: m1 "the" and "charging" find no partner, P = R = 4/5;
# m3 P = 1, R = 2/3; m4 both empty; m5 every token matches
EXPLANATION_EMBED_F1 = [0.8, 0.0, 0.8, 1.0, 1.0]
