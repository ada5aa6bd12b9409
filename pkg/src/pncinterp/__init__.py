"""Toolkit for proper noun compounds: detect candidates in dependency-parsed
text, interpret them with knowledge-augmented seq2seq models or in-context
prompting, score predictions with a hybrid exact/semantic metric, and use the
interpretations to add implicit-relation triples to Open IE output.
"""

from ._kernels import KERNEL_BACKEND
from .types import (
    NON_COMPOSITIONAL,
    DatasetExample,
    Interpretation,
    NonCompositional,
    NounCompound,
    Paraphrase,
    SplitSpec,
    is_compositional,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "NON_COMPOSITIONAL",
    "DatasetExample",
    "Interpretation",
    "NonCompositional",
    "NounCompound",
    "Paraphrase",
    "SplitSpec",
    "__version__",
    "is_compositional",
]
