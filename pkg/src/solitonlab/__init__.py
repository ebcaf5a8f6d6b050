"""solitonlab: internal-mode damping diagnostics for perturbed cubic NLS."""

__version__ = "0.1.0"
