"""Latent-partitioned diffusion serving simulator."""

try:
    from lpsim._lpsim import *  # noqa: F401,F403
    from lpsim._lpsim import __version__  # noqa: F401
except ImportError:  # development layout: extension built next to the package
    from _lpsim import *  # noqa: F401,F403
    from _lpsim import __version__  # noqa: F401
