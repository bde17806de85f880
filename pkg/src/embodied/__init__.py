"""Physically embedded planning environments.

Three planning games are embedded in a deterministic planar physics
simulation: a grid maze where a rolling disc pushes boxes onto targets
(``mujoban``), and two touch-board games played with a planar arm
(``mujoxo`` tic-tac-toe and ``go_NxN`` Go with Tromp-Taylor scoring).
The package also ships the expert planners, the scripted oracle
controllers that solve the environments end to end, and the dual-stream
off-policy policy-gradient math used to train agents on the main task
and the planner-following auxiliary task at the same time.
"""

__version__ = "0.1.0"


def make(name, overrides=None, seed=None):
    """Construct an environment by name (mujoban, mujoxo, go_7x7, ...)."""
    from embodied.envs import make as _make
    return _make(name, overrides, seed)
