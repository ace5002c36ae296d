"""
Config Module: Configuration management for the consensus simulator
"""

import copy
import json
from typing import Any, Dict, Optional

from .errors import ConfigurationError

# Flat field names accepted at the top level of a config file
FLAT_KEYS = {
    "n": "system.n",
    "k": "system.k",
    "f": "system.f",
    "inputs": "system.inputs",
    "lambda": "system.lambda",
    "input_domain": "system.input_domain",
    "seed": "scheduler.seed",
    "max_steps": "scheduler.max_steps",
    "crash_policy": "scheduler.crash_policy",
    "state_cap": "exploration.state_cap",
    "runs": "campaign.runs",
    "workers": "campaign.max_concurrent_operations",
    "retry_factor": "campaign.retry_factor",
}

SECTIONS = ("system", "scheduler", "exploration", "campaign", "logging")


class Config:
    """
    Configuration manager for the consensus simulator.

    Handles loading, storing, and managing configuration settings.
    """

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file
        self.settings = self._default_settings()

        if config_file:
            self.load_from_file(config_file)

    def _default_settings(self) -> Dict[str, Any]:
        """Return default configuration settings."""
        return {
            "system": {
                "n": None,
                "k": None,
                "f": None,
                "inputs": None,
                "lambda": None,
                "input_domain": None
            },
            "scheduler": {
                "seed": 0,
                "max_steps": 100000,
                "crash_policy": "none"
            },
            "exploration": {
                "state_cap": 5000000,
                "progress_every": 100000
            },
            "campaign": {
                "runs": 1000,
                "max_concurrent_operations": 1,
                "retry_factor": 10
            },
            "logging": {
                "level": "WARNING"
            }
        }

    def load_from_file(self, filepath: str):
        """
        Load configuration from a JSON file.

        Raises:
            ConfigurationError: if the file is missing, is not valid JSON
                or is not a JSON object
        """
        try:
            with open(filepath, 'r', encoding="utf-8") as f:
                file_config = json.load(f)
        except FileNotFoundError:
            raise ConfigurationError("config", f"file {filepath} not found")
        except json.JSONDecodeError as exc:
            raise ConfigurationError("config", f"invalid JSON in {filepath}: {exc}")

        if not isinstance(file_config, dict):
            raise ConfigurationError("config", f"{filepath} must hold a JSON object")
        self.update(file_config)

    def save_to_file(self, filepath: str):
        """
        Save current configuration to a JSON file.

        Raises:
            ConfigurationError: if the file cannot be written
        """
        try:
            with open(filepath, 'w', encoding="utf-8") as f:
                json.dump(self.settings, f, indent=4)
        except OSError as exc:
            raise ConfigurationError("save_config", f"cannot write {filepath}: {exc}") from None

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get a configuration value using dot notation.

        Args:
            key_path: Path to the setting using dot notation (e.g. 'system.n')
            default: Default value to return if key doesn't exist

        Returns:
            Configuration value or default
        """
        keys = key_path.split('.')
        value = self.settings

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def set(self, key_path: str, value: Any):
        """
        Set a configuration value using dot notation.

        Args:
            key_path: Path to the setting using dot notation (e.g. 'scheduler.seed')
            value: Value to set
        """
        keys = key_path.split('.')
        config_ref = self.settings

        for key in keys[:-1]:
            if key not in config_ref:
                config_ref[key] = {}
            config_ref = config_ref[key]

        config_ref[keys[-1]] = value

    def update(self, new_settings: Dict[str, Any]):
        """
        Update configuration with new settings.

        Flat run-config field names are routed to their section; anything
        else is merged as a nested section.
        """
        nested = {}
        for key, value in new_settings.items():
            if key in FLAT_KEYS:
                self.set(FLAT_KEYS[key], value)
            elif key in SECTIONS:
                nested[key] = value
            else:
                raise ConfigurationError(key, "unknown configuration field")
        self._merge_configs(self.settings, nested)

    def _merge_configs(self, base: Dict[str, Any], override: Dict[str, Any]):
        """Recursively merge override config into base config."""
        for key, value in override.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._merge_configs(base[key], value)
            else:
                base[key] = value

    def run_fields(self) -> Dict[str, Any]:
        """Return the flat run-config fields, as used to build a RunConfig."""
        return {
            name: copy.deepcopy(self.get(path))
            for name, path in FLAT_KEYS.items()
            if path.startswith(("system.", "scheduler."))
        }
