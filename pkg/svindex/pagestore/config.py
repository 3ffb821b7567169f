from dataclasses import dataclass

from svindex.core.exceptions import ConfigError

MIN_PAGE_SIZE = 256
# offsets inside a page are stored as u16
MAX_PAGE_SIZE = 65536


@dataclass(frozen=True)
class PageStoreConfig:
    """
    Simulated-disk parameters.

    Attributes:
    page_size (int): bytes per page.
    t_disk (float): simulated seconds per page access.
    pad_records (bool): move a record that would cross a page boundary to the
        next page start. Records longer than a page always start on a fresh page.
    """

    page_size: int = 4096
    t_disk: float = 0.01
    pad_records: bool = True

    def __post_init__(self):
        if not MIN_PAGE_SIZE <= self.page_size <= MAX_PAGE_SIZE:
            raise ConfigError(
                f"PageStoreConfig: page_size must be in [{MIN_PAGE_SIZE}, {MAX_PAGE_SIZE}], got {self.page_size}")
        if not self.t_disk >= 0.0:
            raise ConfigError(f"PageStoreConfig: t_disk must be >= 0, got {self.t_disk}")
