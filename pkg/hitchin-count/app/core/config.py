import os

from dotenv import load_dotenv

load_dotenv()


class Settings:
    """Runtime configuration read from the environment (and an optional .env)."""

    # Logging
    LOG_LEVEL = os.getenv("HITCHIN_LOG_LEVEL", "INFO").upper()

    # Randomized suites
    SEED = int(os.getenv("HITCHIN_SEED", "7"))
    CASES = int(os.getenv("HITCHIN_CASES", "20"))
    HULL_SAMPLES = int(os.getenv("HITCHIN_HULL_SAMPLES", "1000"))

    # Limit evaluation
    DIRECTIONS = max(3, int(os.getenv("HITCHIN_DIRECTIONS", "3")))
    SERIES_PAD = int(os.getenv("HITCHIN_SERIES_PAD", "2"))

    # Adelic enumeration
    WINDOW_PAD = int(os.getenv("HITCHIN_WINDOW_PAD", "1"))
    MAX_Q = int(os.getenv("HITCHIN_MAX_Q", "9"))

    def as_dict(self) -> dict:
        """Effective configuration, as echoed in reports."""
        return {
            "log_level": self.LOG_LEVEL,
            "seed": self.SEED,
            "cases": self.CASES,
            "hull_samples": self.HULL_SAMPLES,
            "directions": self.DIRECTIONS,
            "series_pad": self.SERIES_PAD,
            "window_pad": self.WINDOW_PAD,
            "max_q": self.MAX_Q,
        }


settings = Settings()
