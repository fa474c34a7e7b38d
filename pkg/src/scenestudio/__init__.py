"""scenestudio: outdoor-scene attribute manipulation toolkit.

Two stages: a layout- and attribute-conditioned scene generation network
that hallucinates a reference style image, and a closed-form photorealistic
transfer chain that moves the hallucinated look onto a real input image.
"""

__version__ = "0.1.0"
