"""
Experiment output directory: profile CSV, report JSON and timings
"""
import logging
import os
from typing import Dict, List

from utils.file_handler import FileHandler

logger = logging.getLogger(__name__)

PROFILE_FILE = "profile.csv"
REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"


class ReportStore:
    """Manage the files of one experiment run"""

    def __init__(self, output_dir: str):
        """
        Create the output directory if needed

        Args:
            output_dir: Directory the run writes into
        """
        self.output_dir = output_dir
        os.makedirs(output_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def write_profile(self, profile) -> str:
        """
        Write the CT profile as CSV

        Args:
            profile: CTProfile

        Returns:
            Path to the written file
        """
        path = self.path(PROFILE_FILE)
        FileHandler.write_bytes(path, FileHandler.profile_csv(profile))
        return path

    def write_report(self, report) -> str:
        path = self.path(REPORT_FILE)
        FileHandler.write_bytes(path, FileHandler.dumps(report))
        logger.info(f"Report written to {path}")
        return path

    def write_timings(self, timings: Dict[str, float]) -> str:
        """Wall-clock timings, kept out of report.json"""
        path = self.path(TIMINGS_FILE)
        FileHandler.write_bytes(path, FileHandler.dumps(timings))
        return path

    def load_report(self) -> Dict:
        return FileHandler.read_json(self.path(REPORT_FILE))

    def list_files(self) -> List[str]:
        return sorted(f for f in os.listdir(self.output_dir) if f in (PROFILE_FILE, REPORT_FILE, TIMINGS_FILE))
