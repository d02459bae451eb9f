"""Unsupervised learning of relative spatial concepts from noisy speech.

The package simulates teaching episodes in which a trainer stands
somewhere relative to one object among many and says an unsegmented,
noisy phoneme string containing the concept's word.  A joint MCMC
learner recovers the spatial concepts, the reference objects and the
word segmentation together, with a language model feeding segmentation
back in an iterative loop.
"""

__version__ = "0.1.0"
