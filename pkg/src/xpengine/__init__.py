"""xpengine: an experiment-driven MLOps engine.

Declarative experiment specs expand into concrete analytics workflows, run
under grid/random/Bayesian strategies with human checkpoints and budgets, and
feed a knowledge repository used for recommendations, redundancy detection,
cost planning, and drift-triggered re-execution.
"""

__version__ = "0.1.0"
