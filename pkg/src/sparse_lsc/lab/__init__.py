"""Experiment harness: configs, Monte-Carlo runs and reports."""
from .config import EXPERIMENTS, ConfigError, LabConfig, config_from_dict, dump_config, load_config
from .report import write_report
from .runner import ExperimentReport, evaluate, fit_slack, run

__all__ = ["EXPERIMENTS", "ConfigError", "LabConfig", "config_from_dict", "dump_config",
           "load_config", "write_report", "ExperimentReport", "evaluate", "fit_slack", "run"]
