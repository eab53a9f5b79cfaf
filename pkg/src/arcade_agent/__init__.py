"""Modular arcade-game agent.

A small, fully deterministic stack for object-based arcade play: native
desk-scale environments that expose object records, a velocity predictor
that rolls out future ball trajectories against a collision sensor, a
contact-point reward regression, and a goal-conditioned controller trained
with hindsight relabeling. A CLI harness runs seeded experiments and emits
learning-curve CSVs.
"""

__version__ = "0.1.0"
