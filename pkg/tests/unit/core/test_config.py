# tests/unit/core/test_config.py
import logging
import math

import pytest
from pydantic import ValidationError

from app.core.config import Settings, SolverSettings
from app.core.logging import LOG_FORMAT, configure_logging


class TestSettings:

    def test_default_log_level(self, monkeypatch):
        monkeypatch.delenv("DMN_LOG_LEVEL", raising=False)
        settings = Settings(_env_file=None)
        assert settings.log_level == "INFO"
        assert settings.log_level_value == logging.INFO

    def test_log_level_from_environment(self, monkeypatch):
        monkeypatch.setenv("DMN_LOG_LEVEL", "debug")
        settings = Settings(_env_file=None)
        assert settings.log_level == "DEBUG"
        assert settings.log_level_value == logging.DEBUG

    def test_unknown_log_level_rejected(self, monkeypatch):
        monkeypatch.setenv("DMN_LOG_LEVEL", "chatty")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)

    def test_unrelated_environment_ignored(self, monkeypatch):
        monkeypatch.setenv("DMN_UNUSED", "1")
        Settings(_env_file=None)

    def test_configure_logging_uses_level(self, mocker):
        basic_config = mocker.patch("app.core.logging.logging.basicConfig")
        configure_logging(logging.WARNING)
        basic_config.assert_called_once_with(level=logging.WARNING, format=LOG_FORMAT)


class TestSolverSettings:

    def test_defaults(self):
        settings = SolverSettings()
        assert settings.newton_tolerance == 1e-6
        assert settings.max_iterations == 40
        assert settings.max_refinements == 10
        assert settings.max_cracks_per_cell == 4
        assert settings.crack_cosine_limit == pytest.approx(math.sqrt(2.0) / 2.0)
        assert settings.twin_perturbation == 1e-6
        assert settings.penalty_stiffness == 1e8
        assert settings.floor_stiffness == 1e-4

    @pytest.mark.parametrize("field, value", [
        ("newton_tolerance", 0.0),
        ("max_iterations", 0),
        ("max_refinements", -1),
        ("penalty_stiffness", -1.0),
        ("crack_cosine_limit", 1.5),
        ("twin_perturbation", 0.5),
    ])
    def test_invalid_values_rejected(self, field, value):
        with pytest.raises(ValidationError):
            SolverSettings(**{field: value})

    def test_overrides(self):
        settings = SolverSettings(max_iterations=5, newton_tolerance=1e-8)
        assert settings.max_iterations == 5
        assert settings.newton_tolerance == 1e-8
