from pathlib import Path
from typing import Any, Dict

import yaml
from jinja2 import StrictUndefined, Template, TemplateError

from src.service.exceptions import ConfigValidationError

TEMPLATE_DIR = Path(__file__).parent / "templates"


def _load_template(template_path: str | Path) -> str:
    """
    Load a template from a file.

    Args:
        template_path: Path to the template file

    Returns:
        The template as a string
    """
    try:
        return Path(template_path).read_text()
    except OSError as e:
        raise ConfigValidationError(f"Cannot read template {template_path}: {e}") from e


def _render_template(template: str, values: Dict[str, Any]) -> str:
    """
    Render a template using Jinja2. Undefined variables are errors.

    Args:
        template: Template string with Jinja2 variables
        values: Dictionary of values for template rendering

    Returns:
        Rendered template as a string
    """
    try:
        return Template(template, undefined=StrictUndefined).render(**values)
    except TemplateError as e:
        raise ConfigValidationError(f"Template rendering failed: {e}") from e


def render_yaml_template(template_path: str | Path, values: Dict[str, Any]) -> Dict[str, Any]:
    """
    Load, render, and parse a YAML template.

    Args:
        template_path: Path to the YAML template file
        values: Dictionary of values for template rendering

    Returns:
        Parsed YAML as a dictionary
    """
    rendered = _render_template(_load_template(template_path), values)
    try:
        parsed = yaml.safe_load(rendered)
    except yaml.YAMLError as e:
        raise ConfigValidationError(f"Invalid YAML in {template_path}: {e}") from e
    if not isinstance(parsed, dict):
        raise ConfigValidationError(f"{template_path} must contain a YAML mapping")
    return parsed


def render_text_template(name: str, values: Dict[str, Any]) -> str:
    """Render one of the bundled text templates by file name."""
    return _render_template(_load_template(TEMPLATE_DIR / name), values)
