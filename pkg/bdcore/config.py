# -*- coding: utf-8 -*-
"""
config module
"""
import json
import math
from numbers import Number
from dataclasses import dataclass
from typing import List, _GenericAlias

from bdcore.exceptions import ParameterError
from bdcore.utils import verify_file, log_n

ESTIMATOR_FAMILIES = ("coreness", "density")
ORACLE_MODES = ("off", "peel", "exact")
APPS = ("none", "matching", "explicit-color", "implicit-color")


@dataclass
class BaseParams:
    # pylint: disable=no-member
    """
    Base dataclass to be used for loading parameters from a dictionary.
    """

    def __init__(self, params_dict):
        """
        Initialize the dataclass, loading all known data attributes from the input
        dictionary. Attributes with a class-level default are optional.

        Parameters
        ----------
        params_dict : dict
            Input dictionary. Should contain all required attributes of the data
            class.

        Raises
        ------
        ValueError
            A ValueError will be raised if a required attribute is not found in the
            input dictionary.
        TypeError
            A TypeError will be raised if a required attribute is found in the input
            dictionary but is not the correct datatype.
        """
        if not isinstance(params_dict, dict):
            raise TypeError(
                f"Invalid input for {self.__class__}: must be a dictionary/mapping."
            )

        for attr, dtype in self.__annotations__.items():
            # special handling for List[*] dtypes: set dtype to List and get dtype for
            # list elements
            if isinstance(dtype, _GenericAlias) and dtype._name == "List":
                elements_dtype = dtype.__args__
                dtype = list
            else:
                elements_dtype = None

            value = params_dict.get(attr)

            if value is None:
                if not hasattr(type(self), attr):
                    raise ValueError(f"{attr} is missing from input.")
                default = getattr(type(self), attr)
                if isinstance(default, list):
                    default = list(default)
                setattr(self, attr, default)
                continue

            if not isinstance(value, dtype):
                raise TypeError(f"Invalid input for {attr}: must be type {dtype}")

            if elements_dtype is not None:
                # check the dtype of the elements of the list
                for v in value:
                    if not isinstance(v, elements_dtype):
                        raise TypeError(
                            f"Invalid input for {attr}:"
                            f" elements must be type {elements_dtype}"
                        )

            setattr(self, attr, value)

        self._validate()

    def _validate(self):
        """Range checks; subclasses override."""

    def to_dict(self):
        """
        Return the loaded attributes as a plain dictionary.

        Returns
        -------
        dict
            Attribute name to value.
        """
        return {attr: getattr(self, attr) for attr in self.__annotations__}

    @classmethod
    def from_json(cls, config_path, section=None, **overrides):
        """
        Load parameters from a JSON file.

        Parameters
        ----------
        config_path : [str, pathlib.Path]
            Path to configuration JSON file.
        section : str, optional
            Name of a nested section holding the parameters. If the file has no
            such section, top-level keys are used.
        **overrides
            Values that take precedence over the file. None values are ignored.

        Returns
        -------
        BaseParams
            Instance of the calling class.
        """
        verify_file(config_path)
        with open(config_path, "r", encoding="utf-8") as f:
            config_data = json.load(f)

        if section is not None and isinstance(config_data.get(section), dict):
            config_data = config_data[section]

        params = {k: v for k, v in config_data.items() if k in cls.__annotations__}
        params.update({k: v for k, v in overrides.items() if v is not None})

        return cls(params)


class EstimatorConfig(BaseParams):
    # pylint: disable=too-few-public-methods
    """Dataclass defining the parameters shared by every estimator of a ladder."""

    n: int
    epsilon: Number = 0.1
    c_b: Number = 4.0
    seed: int = 0
    inner_epsilon_ratio: Number = 0.125
    log_base: Number = math.e
    ladder_max_level: int = None
    estimators: List[str] = list(ESTIMATOR_FAMILIES)
    max_workers: int = 1

    @classmethod
    def from_json(cls, config_path, section="estimator", **overrides):
        return super().from_json(config_path, section=section, **overrides)

    def _validate(self):
        if self.n < 1:
            raise ParameterError(f"Invalid input for n: must be >= 1, got {self.n}")
        if not 0 < self.epsilon <= 0.1:
            raise ParameterError(
                f"Invalid input for epsilon: must be in (0, 0.1], got {self.epsilon}"
            )
        if self.c_b <= 0:
            raise ParameterError(f"Invalid input for c_b: must be > 0, got {self.c_b}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError(
                f"Invalid input for seed: must be a 64-bit unsigned integer, "
                f"got {self.seed}"
            )
        if not 0 < self.inner_epsilon_ratio <= 1:
            raise ParameterError(
                "Invalid input for inner_epsilon_ratio: must be in (0, 1], "
                f"got {self.inner_epsilon_ratio}"
            )
        if self.log_base <= 1:
            raise ParameterError(
                f"Invalid input for log_base: must be > 1, got {self.log_base}"
            )
        if self.ladder_max_level is not None and self.ladder_max_level < 0:
            raise ParameterError(
                "Invalid input for ladder_max_level: must be >= 0, "
                f"got {self.ladder_max_level}"
            )
        unknown = set(self.estimators).difference(ESTIMATOR_FAMILIES)
        if unknown or not self.estimators:
            raise ParameterError(
                f"Invalid input for estimators: must be a non-empty subset of "
                f"{list(ESTIMATOR_FAMILIES)}, got {self.estimators}"
            )
        if self.max_workers < 1:
            raise ParameterError(
                f"Invalid input for max_workers: must be >= 1, got {self.max_workers}"
            )

    @property
    def b(self):
        """Threshold B = ceil(c_b * log(n) / epsilon^2), at least 1."""
        value = self.c_b * log_n(self.n, self.log_base) / self.epsilon**2
        return max(1, math.ceil(value))

    @property
    def inner_epsilon(self):
        """Per-layer epsilon used inside the fixed-H estimators."""
        return self.epsilon * self.inner_epsilon_ratio

    @property
    def ladder_levels(self):
        """Index L of the top ladder level, H_L = (1 + epsilon)^L >= n."""
        levels = max(0, math.ceil(math.log(max(self.n, 1)) / math.log1p(self.epsilon)))
        if self.ladder_max_level is not None:
            levels = min(levels, self.ladder_max_level)
        return levels


class HarnessConfig(BaseParams):
    # pylint: disable=too-few-public-methods
    """Dataclass defining the command line harness parameters."""

    oracle_mode: str = "off"
    app: str = "none"
    rho_max: Number = None
    core_samples: int = 8
    interval_widening: Number = 1.25
    phase_ceiling_alpha: Number = 8
    exact_size_limit: int = 24

    @classmethod
    def from_json(cls, config_path, section="harness", **overrides):
        return super().from_json(config_path, section=section, **overrides)

    def _validate(self):
        if self.oracle_mode not in ORACLE_MODES:
            raise ParameterError(
                f"Invalid input for oracle_mode: must be one of {list(ORACLE_MODES)}, "
                f"got {self.oracle_mode}"
            )
        if self.app not in APPS:
            raise ParameterError(
                f"Invalid input for app: must be one of {list(APPS)}, got {self.app}"
            )
        if self.app != "none" and (self.rho_max is None or self.rho_max <= 0):
            raise ParameterError(
                f"Invalid input for rho_max: a positive value is required by {self.app}"
            )
        if self.core_samples < 0:
            raise ParameterError(
                f"Invalid input for core_samples: must be >= 0, got {self.core_samples}"
            )
        if self.interval_widening < 1:
            raise ParameterError(
                "Invalid input for interval_widening: must be >= 1, "
                f"got {self.interval_widening}"
            )
        if self.phase_ceiling_alpha <= 0:
            raise ParameterError(
                "Invalid input for phase_ceiling_alpha: must be > 0, "
                f"got {self.phase_ceiling_alpha}"
            )
