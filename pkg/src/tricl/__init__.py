"""tricl: template-guided tri-modal contrastive learning for acoustic
target recognition, desk-scale and dependency-light."""

__version__ = "0.1.0"
