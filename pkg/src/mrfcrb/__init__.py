"""Monte Carlo Fisher information and Cramer-Rao bounds for Ising/Potts
Markov random fields, with an exact enumeration oracle at desk scale."""

__version__ = "0.1.0"
