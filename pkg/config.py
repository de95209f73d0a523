#!/usr/bin/env python3
"""
Configuration management for gapdiag

Handles tolerances, quadrature and series settings, environment variables,
and configuration persistence.
"""

import os
import json
import logging
from pathlib import Path
from typing import Dict, Any, Optional
from dataclasses import dataclass, field, asdict, replace

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass

logger = logging.getLogger(__name__)


@dataclass
class ToleranceConfig:
    """Numerical tolerances (absolute-plus-relative: tol * (1 + ||input||))"""
    oracle: float = 1e-6  # Riesz vs Schur distance
    convergence: float = 1e-9  # quadrature refinement
    projector: float = 1e-7  # idempotency, scaled by 1 + ||Q||^2
    accretivity_margin: float = 1e-9
    omega_series: float = 1e-12

    def validate(self) -> tuple[bool, str]:
        """Validate that all tolerances are positive"""
        for name, value in asdict(self).items():
            if not value > 0:
                return False, f"Tolerance '{name}' must be positive, got {value}"
        return True, "Tolerances valid"


@dataclass
class QuadratureConfig:
    """Imaginary-axis quadrature configuration"""
    initial_nodes: int = 64
    max_nodes: int = 2 ** 16
    radius: Optional[float] = None  # None: geometric midpoint of singular values
    axis_margin: float = 1e-6

    def validate(self) -> tuple[bool, str]:
        """Validate quadrature settings"""
        if self.initial_nodes < 8 or self.initial_nodes % 2:
            return False, "Quadrature node count must be even and at least 8"
        if self.max_nodes < self.initial_nodes:
            return False, "Maximum node count below the initial node count"
        if self.radius is not None and not self.radius > 0:
            return False, "Quadrature radius must be positive"
        return True, "Quadrature configuration valid"


@dataclass
class DkhConfig:
    """Coupling-constant family and Taylor truncation configuration"""
    radius_fraction: float = 0.5
    min_circle_nodes: int = 64
    nodes_per_order: int = 8
    aliasing_tolerance: float = 1e-7
    gamma_max_resolution: float = 1e-3
    gamma_max_cap: float = 64.0
    ray_directions: int = 16
    resolvent_eta: float = 1.0
    rate_tolerance: float = 0.2  # fitted vs |gamma| / r_*

    def validate(self) -> tuple[bool, str]:
        """Validate series settings"""
        if not 0 < self.radius_fraction < 1:
            return False, "Taylor radius fraction must lie in (0, 1)"
        if self.ray_directions < 1 or self.min_circle_nodes < 1 or self.nodes_per_order < 1:
            return False, "Ray and node counts must be positive"
        if not (self.rate_tolerance > 0 and self.resolvent_eta > 0):
            return False, "Rate tolerance and resolvent eta must be positive"
        return True, "DKH configuration valid"


@dataclass
class DiracConfig:
    """Dirac application constants"""
    alpha: float = 1.0 / 137.035999
    guard_band: float = 1e-12


@dataclass
class OutputConfig:
    """Report export configuration"""
    reports_dir: str = "reports"
    json_indent: int = 2
    csv_delimiter: str = ","


@dataclass
class UIConfig:
    """User interface configuration"""
    show_debug: bool = False
    table_style: str = "rounded"  # rounded, simple, heavy


@dataclass
class AppConfig:
    """Main application configuration"""
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    dkh: DkhConfig = field(default_factory=DkhConfig)
    dirac: DiracConfig = field(default_factory=DiracConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    ui: UIConfig = field(default_factory=UIConfig)

    # Application info
    app_name: str = "gapdiag"
    app_version: str = "1.0.0"

    @property
    def reports_path(self) -> Path:
        """Get reports directory path"""
        return Path(self.output.reports_dir)

    def validate(self) -> tuple[bool, str]:
        """Validate all sections"""
        for section in (self.tolerances, self.quadrature, self.dkh):
            ok, message = section.validate()
            if not ok:
                return False, message
        if not self.dirac.alpha > 0:
            return False, "Fine-structure constant must be positive"
        return True, "Configuration valid"

    def with_overrides(self, **sections: Dict[str, Any]) -> "AppConfig":
        """Copy of this configuration with per-section field overrides.

        None values are ignored so CLI flags that were not given keep the
        configured default.
        """
        updated = {}
        for name, values in sections.items():
            current = getattr(self, name)
            changes = {k: v for k, v in values.items() if v is not None}
            updated[name] = replace(current, **changes) if changes else current
        return replace(self, **updated)


_SECTIONS = ('tolerances', 'quadrature', 'dkh', 'dirac', 'output', 'ui')


_TRUE = ('true', '1', 'yes')
_FALSE = ('false', '0', 'no')


def _coerce(value: Any, default: Any) -> Any:
    """``value`` converted to the type of ``default``.

    A None default (the automatic quadrature radius) takes a float or null.
    Raises TypeError or ValueError when the value does not fit.
    """
    if value is None:
        if default is None:
            return None
        raise TypeError("null value")
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in _TRUE + _FALSE:
            return value.lower() in _TRUE
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(value, bool):
        raise ValueError(f"unexpected boolean {value!r}")
    if isinstance(default, int):
        number = float(value)
        if not number.is_integer():
            raise ValueError(f"not an integer: {value!r}")
        return int(number)
    if isinstance(default, float) or default is None:
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, (str, int, float)):
            raise ValueError(f"not a string: {value!r}")
        return str(value)
    return value


class ConfigManager:
    """Configuration manager for gapdiag"""

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = Path(config_file) if config_file else None
        self._config: Optional[AppConfig] = None

    @property
    def config(self) -> AppConfig:
        """Get current configuration (property access)"""
        return self.get_config()

    def load_config(self) -> AppConfig:
        """Load configuration from environment and file"""
        if self._config is not None:
            return self._config

        config = AppConfig()

        self._load_from_env(config)

        config_file = self.config_file or Path(os.getenv('GAPDIAG_CONFIG', 'gapdiag.json'))
        if config_file.exists():
            self._load_from_file(config, config_file)

        self._config = config
        return config

    def save_config(self, config: AppConfig) -> bool:
        """Save configuration to the JSON config file"""
        try:
            config_file = self.config_file or Path('gapdiag.json')
            with open(config_file, 'w', encoding='utf-8') as f:
                json.dump(self._config_to_dict(config), f, indent=2, ensure_ascii=False)
            self._config = config
            return True
        except OSError as e:
            logger.error("Error saving config: %s", e)
            return False

    def _load_from_env(self, config: AppConfig):
        """Load configuration from environment variables"""
        if os.getenv('GAPDIAG_REPORTS_DIR'):
            config.output.reports_dir = os.getenv('GAPDIAG_REPORTS_DIR')

        if os.getenv('GAPDIAG_DEBUG'):
            config.ui.show_debug = os.getenv('GAPDIAG_DEBUG', '').lower() in ('true', '1', 'yes')

        if os.getenv('GAPDIAG_ALPHA'):
            try:
                config.dirac.alpha = float(os.getenv('GAPDIAG_ALPHA'))
            except ValueError:
                logger.warning("Ignoring non-numeric GAPDIAG_ALPHA")

        if os.getenv('GAPDIAG_QUAD_NODES'):
            try:
                config.quadrature.initial_nodes = int(os.getenv('GAPDIAG_QUAD_NODES'))
            except ValueError:
                logger.warning("Ignoring non-integer GAPDIAG_QUAD_NODES")

    def _load_from_file(self, config: AppConfig, config_file: Path):
        """Load configuration from JSON file"""
        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, ValueError) as e:
            logger.warning("Could not load config file %s: %s", config_file, e)
            return
        if not isinstance(data, dict):
            logger.warning("Ignoring config file %s: top level is not an object", config_file)
            return

        for section_name in _SECTIONS:
            values = data.get(section_name)
            if values is None:
                continue
            if not isinstance(values, dict):
                logger.warning("Ignoring config section '%s': not an object", section_name)
                continue
            section = getattr(config, section_name)
            for key, value in values.items():
                if not hasattr(section, key):
                    continue
                try:
                    setattr(section, key, _coerce(value, getattr(section, key)))
                except (TypeError, ValueError):
                    logger.warning("Ignoring %s.%s = %r: wrong type", section_name, key, value)

    def _config_to_dict(self, config: AppConfig) -> Dict[str, Any]:
        """Convert configuration to dictionary for JSON serialization"""
        data = {name: asdict(getattr(config, name)) for name in _SECTIONS}
        data['app_name'] = config.app_name
        data['app_version'] = config.app_version
        return data

    def reset_config(self) -> AppConfig:
        """Reset configuration to defaults"""
        self._config = None
        return self.load_config()

    def get_config(self) -> AppConfig:
        """Get current configuration (load if not already loaded)"""
        if self._config is None:
            return self.load_config()
        return self._config


# Global configuration manager instance
config_manager = ConfigManager()


def get_config() -> AppConfig:
    """Get current application configuration"""
    return config_manager.get_config()


def save_config(config: AppConfig) -> bool:
    """Save application configuration"""
    return config_manager.save_config(config)
