import collections
import csv
import io
import math
import numpy as np
from ..AtomicFile import atomic_write
from ..CalibError import LayoutError, NoValidIterationError
from ..Control import ControlBounds, ControlProfile, training_profile
from ..ParameterSpace import ParameterBounds, ParameterVector

from typing import Iterator, List

IterationRecord = collections.namedtuple('IterationRecord', 'iteration params control error confidence rationale evaluations lag flags')
"""
NamedTuple for one row of a run history

**Properties:**
- `iteration` - 1-based index
- `params` - Evaluated (clamped) `ParameterVector`, the generation best for CMA-ES
- `control` - `ControlProfile` it ran with
- `error` - Training error (`inf` if diverged)
- `confidence` - Confidence of the recommendation that produced it (None for the initial point)
- `rationale` - Reason given for it
- `evaluations` - Cumulative simulator evaluations so far
- `lag` - Alignment lag in frames (None if diverged)
- `flags` - Tuple of notes
"""

FIXED_COLUMNS = ["iteration", "evaluations", "error", "best_error", "confidence", "lag_frames", "flags"]

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)

class RunHistory:
    """
    Chronological iteration records of one calibration run, indices contiguous from 1
    """
    def __init__(self, bounds:ParameterBounds, cbounds:ControlBounds, records:List[IterationRecord]=None):
        self.bounds = bounds
        """Layout of the recorded params"""
        self.cbounds = cbounds
        """Layout of the recorded control amplitudes"""
        self._records = []
        for r in records or []:
            self.append(r)

    def append(self, record:IterationRecord):
        if record.iteration != len(self._records) + 1:
            raise LayoutError("Expected iteration {}, got {}".format(len(self._records) + 1, record.iteration))
        self._records.append(record)

    def __len__(self):
        return len(self._records)

    def __iter__(self) -> Iterator[IterationRecord]:
        return iter(self._records)

    def __getitem__(self, i) -> IterationRecord:
        return self._records[i]

    @property
    def errors(self) -> List[float]:
        return [r.error for r in self._records]

    def best_so_far(self) -> List[float]:
        """Running minimum of the errors"""
        return list(np.minimum.accumulate(self.errors)) if self._records else []

    def best(self) -> IterationRecord:
        """Record of `select_best_iteration`"""
        return self._records[select_best_iteration(self) - 1]

    def table(self) -> str:
        """
        Fixed-width text table (iteration, parameters, error) for recommendation prompts
        """
        names = self.bounds.names
        head = ["Iter"] + names + self.cbounds.names + ["error"]
        rows = []
        for r in self._records:
            rows.append([str(r.iteration)] + ["{:.6g}".format(r.params[n]) for n in names]
                        + ["{:.6g}".format(a) for a in r.control.amplitudes]
                        + ["{:.2f}".format(r.error) if math.isfinite(r.error) else "diverged"])
        widths = [max([len(h)] + [len(row[i]) for row in rows]) for i, h in enumerate(head)]
        lines = [" | ".join(h.center(w) for h, w in zip(head, widths))]
        lines += [" | ".join(c.center(w) for c, w in zip(row, widths)) for row in rows]
        return "\n".join(lines)

    def columns(self) -> List[str]:
        """history.csv header"""
        return FIXED_COLUMNS + self.bounds.names + self.cbounds.names + ["rationale"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns())
        best = self.best_so_far()
        for r, b in zip(self._records, best):
            writer.writerow([r.iteration, r.evaluations, _fmt(float(r.error)), _fmt(float(b)), _fmt(r.confidence), _fmt(r.lag), ";".join(r.flags)]
                            + [_fmt(r.params[n]) for n in self.bounds.names]
                            + [_fmt(float(a)) for a in r.control.amplitudes]
                            + [r.rationale or ""])
        return buf.getvalue()

    def save(self, path:str):
        atomic_write(path, self.to_csv())

    @classmethod
    def load(cls, path:str, bounds:ParameterBounds, cbounds:ControlBounds) -> "RunHistory":
        """
        Read a history.csv written by `save`

        Parameters:
            path (str): File
            bounds (ParameterBounds): Tuned coordinates of the run
            cbounds (ControlBounds): Control layout of the run
        """
        history = cls(bounds, cbounds)
        with open(path, "r", newline="") as f:
            reader = csv.DictReader(f)
            missing = set(FIXED_COLUMNS + bounds.names + cbounds.names) - set(reader.fieldnames or [])
            if missing:
                raise LayoutError("{} lacks columns {}".format(path, sorted(missing)))
            for row in reader:
                params = ParameterVector(bounds, [float(row[n]) for n in bounds.names])
                control = training_profile(cbounds, [float(row[n]) for n in cbounds.names])
                history.append(IterationRecord(
                    iteration=int(row["iteration"]),
                    params=params,
                    control=control,
                    error=float(row["error"]),
                    confidence=float(row["confidence"]) if row["confidence"] else None,
                    rationale=row.get("rationale", ""),
                    evaluations=int(row["evaluations"]),
                    lag=int(row["lag_frames"]) if row["lag_frames"] else None,
                    flags=tuple(f for f in row["flags"].split(";") if f),
                ))
        return history

    def __repr__(self):
        return "RunHistory({} iterations)".format(len(self._records))

def select_best_iteration(history) -> int:
    """
    1-based index of the lowest finite error, earliest on ties

    Parameters:
        history (RunHistory or list): Records, or plain error values
    """
    errors = [r.error if isinstance(r, IterationRecord) else float(r) for r in history]
    finite = [i for i, e in enumerate(errors) if math.isfinite(e)]
    if not finite:
        raise NoValidIterationError("No iteration has a finite error")
    return min(finite, key=lambda i: (errors[i], i)) + 1
