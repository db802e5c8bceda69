"""
Localization module for cosched

Provides English and Danish texts for report headers and validation output.
"""
import logging
import os
from typing import Dict, Optional, Tuple

logger = logging.getLogger(__name__)

LANG_ENV = "COSCHED_LANG"


class LocalizationService:
    """Service for handling report and diagnostic localization"""

    # Language codes
    ENGLISH = "en"
    DANISH = "da"

    # Report and console texts
    _languages: Dict[str, Dict[str, str]] = {
        ENGLISH: {
            "run": "Run",
            "power_cost": "Power Cost",
            "main_products": "Main Products",
            "by_products": "By-products",
            "objective": "Objective",
            "equipment_cost": "Equipment Cost",
            "degradation_cost": "Battery Degradation",
            "fr_penalty": "FR Penalty",
            "hour": "Hour",
            "consumption": "Consumption",
            "net_purchase": "Net Purchase",
            "soc": "State of Charge",
            "gap": "Gap",
            "iterations": "Iterations",
            "mean": "Mean",
            "std": "Std",
            "violation_rate": "FR Box Violation Rate",
            "solved": "Solved: objective {objective:.6f}, gap {gap:.3g}, {iterations} iterations",
            "oracle_value": "Oracle optimum {value:.6f} over {count} schedules",
            "instance_ok": "Instance is valid",
            "instance_bad": "Instance has {count} problem(s)",
            "written": "Wrote {path}",
        },
        DANISH: {
            "run": "Kørsel",
            "power_cost": "Strømomkostning",
            "main_products": "Hovedprodukter",
            "by_products": "Biprodukter",
            "objective": "Målfunktion",
            "equipment_cost": "Udstyrsomkostning",
            "degradation_cost": "Batterislid",
            "fr_penalty": "FR-straf",
            "hour": "Time",
            "consumption": "Forbrug",
            "net_purchase": "Nettokøb",
            "soc": "Ladetilstand",
            "gap": "Gab",
            "iterations": "Iterationer",
            "mean": "Middel",
            "std": "Spredning",
            "violation_rate": "FR-boksoverskridelser",
            "solved": "Løst: målfunktion {objective:.6f}, gab {gap:.3g}, {iterations} iterationer",
            "oracle_value": "Orakeloptimum {value:.6f} over {count} planer",
            "instance_ok": "Instansen er gyldig",
            "instance_bad": "Instansen har {count} problem(er)",
            "written": "Skrev {path}",
        },
    }

    # Validation check names
    _diagnostic_texts = {
        ENGLISH: {
            "schema": "Schema",
            "horizon": "Horizon",
            "buffer": "Buffers",
            "workshop": "Workshops",
            "option": "Equipment options",
            "edge": "Buffer reference",
            "rtp": "Real-time price",
            "der": "DER output",
            "energy": "Energy system",
            "ok": "ok",
            "failed": "failed",
        },
        DANISH: {
            "schema": "Skema",
            "horizon": "Horisont",
            "buffer": "Lagre",
            "workshop": "Værksteder",
            "option": "Udstyrsvalg",
            "edge": "Lagerreference",
            "rtp": "Realtidspris",
            "der": "DER-produktion",
            "energy": "Energisystem",
            "ok": "ok",
            "failed": "fejlet",
        },
    }

    def __init__(self, language: Optional[str] = None):
        code = (language or os.environ.get(LANG_ENV, "") or self.ENGLISH).lower()
        if code not in self._languages:
            logger.warning("%s=%r is not a known language, using English", LANG_ENV, code)
            code = self.ENGLISH
        self._current_language_code = code

    @property
    def languages(self) -> Tuple[str, ...]:
        return tuple(self._languages)

    def set_language(self, code: str) -> None:
        if code not in self._languages:
            raise ValueError(f"unknown language {code!r}")
        self._current_language_code = code

    @property
    def current_language_code(self) -> str:
        return self._current_language_code

    @property
    def current_language(self) -> Dict[str, str]:
        return self._languages[self._current_language_code]

    @property
    def current_diagnostic_texts(self) -> Dict[str, str]:
        return self._diagnostic_texts[self._current_language_code]

    def get_text(self, key: str, default: Optional[str] = None) -> str:
        """
        Get text for a given key in the current language

        Args:
            key: The dictionary key
            default: Default text if key is not found

        Returns:
            The localized text
        """
        return self.current_language.get(key, default or key)

    def check_name(self, check: str) -> str:
        return self.current_diagnostic_texts.get(check, check)


# Create a global instance
localization = LocalizationService()
