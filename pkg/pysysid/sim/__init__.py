from .Camera import Camera, CAMERAS
from .FingerModel import FingerModel, run_finger
from .RodModel import RodModel, RodRun, run_rod
from .Scenario import GroundTruthScenario, ScenarioSource, ReplaySource, ground_truth_scenario, physical_params, simulate
