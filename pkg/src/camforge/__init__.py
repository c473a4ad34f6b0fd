"""camforge: build and exercise small constructed languages.

Submodules cover the pipeline end to end: phoneme inventories and root
sampling (phonology), underlying-form notation and the rewrite cascade
(morphology), lexicon management (lexicon), typological profiles
(typology), summary metrics (rouge), model benchmarking (bench), and
transcript verification (verify).
"""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def data_path(name: str) -> Path:
    """Absolute path of a file shipped in camforge/data."""
    return Path(str(resources.files("camforge").joinpath("data", name)))
