import csv
import io
import logging
from pathlib import Path

from django.conf import settings

from ..models import DesignMatrix

logger = logging.getLogger(__name__)


class ExportService:
    def __init__(self, export_dir: str | Path | None = None):
        self.export_dir = Path(export_dir or settings.MLDEG['EXPORT_DIR'])

    def matrix_csv(self, design: DesignMatrix) -> str:
        """
        Design matrix as CSV
        :param design: Matrix to export
        :return: Header of dyad labels, then one labelled line per row; labels are quoted
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(("row",) + design.column_labels)
        for label, row in zip(design.row_labels, design.entries):
            writer.writerow([label] + [int(x) for x in row])
        return buffer.getvalue()

    def matrix_json(self, design: DesignMatrix) -> dict:
        return {
            "spec": list(design.spec.sizes),
            "rows": list(design.row_labels),
            "columns": list(design.column_labels),
            "entries": design.entries.tolist(),
        }

    def get_export_path(self, file_name: str) -> Path:
        return self.export_dir / file_name

    def write(self, file_name: str, content: str) -> Path:
        """
        Write content under the export directory, replacing any previous file
        :return: Path of the written file
        """
        path = Path(file_name)
        if not path.is_absolute():
            path = self.get_export_path(file_name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as export_file:
            export_file.write(content)
        logger.info("wrote %s", path)
        return path
