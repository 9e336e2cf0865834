class JobError(RuntimeError):
    """The job cannot run: bad job file, unresolvable checkpoint, missing data."""


class ConfigurationError(RuntimeError):
    """The checkpoint is incompatible with the job (e.g. wrong head class count)."""
