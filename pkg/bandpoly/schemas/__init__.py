from .experiment import CheckReport, CommandName, ExperimentConfig, OutputFormat, RunRecord

__all__ = ["CheckReport", "CommandName", "ExperimentConfig", "OutputFormat", "RunRecord"]
