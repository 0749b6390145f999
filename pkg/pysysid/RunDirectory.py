import json
import os
from .AtomicFile import atomic_write
from .CalibError import ConfigError
from .Trajectory import Trajectory

from typing import Dict

RUN_FILE = "run.json"
HISTORY_FILE = "history.csv"
TRAJECTORY_DIR = "trajectories"

class RunDirectory:
    """
    Output directory of one calibration run

    Layout:

        run.json                     configuration and result summary
        history.csv                  one row per iteration
        trajectories/iter_NN_sim.csv simulated trajectory of iteration NN (+ .json sidecar)
        trajectories/iter_NN_real.csv observation it was compared with
    """
    def __init__(self, path:str, force:bool=False):
        """
        Parameters:
            path (str): Directory (created if needed)
            force (bool): Allow writing into a directory that already holds a run
        """
        self.path = path
        if os.path.exists(os.path.join(path, RUN_FILE)) and not force:
            raise ConfigError("{} already holds a run; use --force to overwrite".format(path), field="output")
        os.makedirs(os.path.join(path, TRAJECTORY_DIR), exist_ok=True)

    @property
    def history_path(self) -> str:
        return os.path.join(self.path, HISTORY_FILE)

    @property
    def run_path(self) -> str:
        return os.path.join(self.path, RUN_FILE)

    def write_iteration(self, iteration:int, sim:Trajectory, real:Trajectory) -> Dict[str, str]:
        """
        Save the trajectories of one iteration

        Returns:
            (dict): `sim` / `real` -> CSV path (missing keys for absent trajectories)
        """
        out = {}
        for role, traj in (("sim", sim), ("real", real)):
            if traj is None:
                continue
            path = os.path.join(self.path, TRAJECTORY_DIR, "iter_{:02d}_{}.csv".format(iteration, role))
            traj.save(path)
            out[role] = path
        return out

    def write_history(self, history):
        history.save(self.history_path)

    def write_run(self, document:Dict):
        atomic_write(self.run_path, json.dumps(document, indent=2, sort_keys=True, default=_jsonable))

    def __repr__(self):
        return "RunDirectory({!r})".format(self.path)

def _jsonable(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, float):
        return value
    raise TypeError("{!r} is not JSON serializable".format(value))

def read_run(path:str) -> Dict:
    """run.json of a run directory"""
    try:
        with open(os.path.join(path, RUN_FILE), "r") as f:
            return json.load(f)
    except OSError as e:
        raise ConfigError("{} is not a run directory: {}".format(path, e), field="runs")
