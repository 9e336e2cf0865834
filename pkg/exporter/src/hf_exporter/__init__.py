"""Fine-tune pretrained encoder checkpoints and export their predictions.

The only coupling with the consuming toolkit is the predictions file: JSON
lines, UTF-8, LF, one object per line with ``example_id``, ``model_id``,
three-class ``logits``, and ``label`` (the logits argmax).
"""

__version__ = "0.1.0"

from .errors import ConfigurationError, JobError
from .job import ExporterJob, load_job
from .runner import export_predictions

__all__ = [
    "ConfigurationError",
    "ExporterJob",
    "JobError",
    "export_predictions",
    "load_job",
]
