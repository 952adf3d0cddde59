"""Exception types raised across the toolkit.

All errors derive from :class:`HiflocError` so callers (notably the CLI)
can map failure categories onto exit codes without enumerating modules.
"""


class HiflocError(Exception):
    """Base class for all toolkit errors."""


# --- network model ---

class NoLoadFlow(HiflocError):
    """Pre-fault relay current is (numerically) zero, so the load
    impedance point V/I is undefined."""


class DegenerateNetwork(HiflocError):
    """Total series sequence impedance of the fault loop is ~zero."""


class BadSampling(HiflocError):
    """Sample rate is not an integer multiple of the system frequency."""


# --- relay measurement ---

class BadWindow(HiflocError):
    """DFT window length does not match the configured samples per cycle."""


class ZeroCurrent(HiflocError):
    """Compensated current magnitude too small for an impedance estimate."""


class RecordTooShort(HiflocError):
    """Waveform record shorter than one full DFT window."""


# --- feature pipeline ---

class EmptyLocus(HiflocError):
    """Impedance locus contains no points."""


class EmptyDataset(HiflocError):
    """Dataset (or its training split) contains no rows."""


class DimensionMismatch(HiflocError):
    """Vector/matrix dimensions inconsistent with the model or normalizer."""


# --- neural network training ---

class BadTopology(HiflocError):
    """Requested layer sizes do not describe a valid perceptron."""


class EmptyBatch(HiflocError):
    """Gradient requested over an empty batch."""


class NonFiniteLoss(HiflocError):
    """Training loss or gradient became NaN/Inf (divergence guard)."""


class LineSearchFailure(HiflocError):
    """Line search found no acceptable step within its evaluation budget."""


# --- harness ---

class IoFailure(HiflocError):
    """Artifact could not be written or read."""
