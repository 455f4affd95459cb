"""sepvote - face forgery detection with segmented latent features and hard voting.

A numpy toolkit that splits a CNN's latent feature map into blocks, classifies every block with
its own small head and hard-votes the block labels into an image label.
"""

try:
    from importlib.metadata import version
    __version__ = version("sepvote")
except Exception:
    __version__ = "0.0.0.dev"

from sepvote.cli.main import main

__all__ = ["main", "__version__"]
