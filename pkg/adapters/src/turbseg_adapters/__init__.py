"""Adapters running flow / semantic / promptable-segmentation models and
exchanging files with the turbseg pipeline (its only coupling surface)."""

__version__ = "0.1.0"
