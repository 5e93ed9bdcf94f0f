"""Cross-Kerr parity QND measurement and entanglement concentration of microwave photons."""

__version__ = "0.1.0"
