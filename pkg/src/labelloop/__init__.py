"""labelloop: interactive data labelling with weak supervision rules and
an actively trained model, combined by confidence-gated aggregation."""

__version__ = "0.1.0"

from .core import Dataset, Instance, LabelFunction  # noqa: F401
from .harness import Session, SessionConfig, run_ablation, run_session, run_sessions  # noqa: F401
