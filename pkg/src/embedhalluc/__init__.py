"""Few-shot text classification with hallucinated sentence embeddings.

A conditional Wasserstein GAN with gradient penalty learns the
class-conditional distribution of real sentence embeddings; a student
classifier then fine-tunes on the real few-shot set plus a stream of
hallucinated embedding-label pairs, optionally re-labeled by a teacher
(label calibration). EDA lexical editing and pseudo-labeling over an
unlabeled pool are included as comparison augmenters, together with an
experiment harness (few-shot splits, grid search, multi-seed reports).
"""

__version__ = "0.1.0"

from embedhalluc.kernels import BACKEND as kernel_backend  # noqa: F401
