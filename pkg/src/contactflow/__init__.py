"""contactflow: flow-matching manipulation policies with force/vision
conditioning, a deterministic 2-D contact simulator, and a vision-to-force
handover layer. Pure numpy; every stochastic component takes an explicit
seed."""

__version__ = "0.1.0"
