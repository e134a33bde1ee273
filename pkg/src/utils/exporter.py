"""
Export Manager - Esporta raster, censimenti e report in vari formati
"""
import csv
import json
import logging
import os
import sys
from contextlib import contextmanager
from typing import Any, Dict, IO, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src import __version__
from src.core import config
from src.core.config import RunConfig
from src.core.exceptions import GeometryError
from src.wave.field_sampler import FieldRaster
from src.wave.nodal_counter import NodalCensus

logger = logging.getLogger(__name__)

RASTER_DTYPE = np.dtype("<f4")
SIDECAR_FIELDS = ("h", "half_extent", "center", "rows", "cols", "seed", "n_trunc")
CSV_RASTER_COLUMNS = ("x", "y", "value")


class RunExporter:
    """Gestisce l'export dei risultati di un run in diversi formati"""

    def __init__(self, export_dir: str = config.EXPORT_DIR, run_config: Optional[RunConfig] = None):
        """
        Inizializza l'exporter

        Args:
            export_dir: Directory dove salvare i raster quando non viene dato un percorso
            run_config: Configurazione del run, incorporata in ogni header
        """
        self.export_dir = export_dir
        self.run_config = run_config

    def _ensure_dir(self, path: str):
        """Crea la directory del file se non esiste"""
        directory = os.path.dirname(path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
            logger.info(f"📁 Creata directory di export: {directory}")

    def header(self) -> Dict[str, Any]:
        """Header comune a tutti gli output: versione e configurazione completa"""
        return {
            "type": "header",
            "version": __version__,
            "config": self.run_config.to_dict() if self.run_config else {},
        }

    # === Raster ===

    def raster_sidecar(self, raster: FieldRaster) -> Dict[str, Any]:
        """
        Costruisce il sidecar JSON di un raster

        Args:
            raster: Raster da descrivere

        Returns:
            Dizionario con geometria, provenienza, versione e configurazione
        """
        rows, cols = raster.values.shape
        return {
            "h": raster.h,
            "half_extent": raster.half_extent,
            "center": [float(raster.center[0]), float(raster.center[1])],
            "rows": rows,
            "cols": cols,
            "seed": int(raster.seed),
            "n_trunc": int(raster.n_trunc),
            "dtype": "float32-le",
            "version": __version__,
            "config": self.run_config.to_dict() if self.run_config else {},
        }

    def _raster_base(self, raster: FieldRaster, path: Optional[str]) -> str:
        if path:
            return os.path.splitext(path)[0]
        return os.path.join(self.export_dir, f"raster_seed{raster.seed}_h{raster.h:g}")

    def export_raster(self, raster: FieldRaster, path: Optional[str] = None, fmt: str = "bin") -> List[str]:
        """
        Esporta un raster come binario float32 little-endian + sidecar JSON, oppure CSV

        Args:
            raster: Raster da esportare
            path: Percorso di output (l'estensione viene sostituita)
            fmt: 'bin' o 'csv'

        Returns:
            Lista dei file creati
        """
        base = self._raster_base(raster, path)
        self._ensure_dir(base)
        sidecar_path = base + ".json"

        if fmt == "csv":
            if raster.values.size > config.CSV_MAX_NODES:
                raise GeometryError(
                    f"raster has {raster.values.size} nodes; CSV export is limited to {config.CSV_MAX_NODES}"
                )
            body_path = base + ".csv"
            xx, yy = raster.grid.coordinates()
            with open(body_path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(CSV_RASTER_COLUMNS)
                for x, y, v in zip(xx.ravel().tolist(), yy.ravel().tolist(), raster.values.ravel().tolist()):
                    writer.writerow((repr(x), repr(y), repr(v)))
        elif fmt == "bin":
            body_path = base + ".bin"
            raster.values.astype(RASTER_DTYPE).tofile(body_path)
        else:
            raise ValueError(f"unsupported raster format {fmt!r}")

        with open(sidecar_path, "w", encoding="utf-8") as f:
            json.dump(self.raster_sidecar(raster), f, indent=2)

        logger.info(f"✅ Raster esportato: {body_path} (+ {sidecar_path})")
        return [body_path, sidecar_path]

    @staticmethod
    def read_raster(path: str) -> FieldRaster:
        """
        Rilegge un raster esportato (.bin o .csv) insieme al suo sidecar

        Args:
            path: Percorso del file .bin o .csv

        Returns:
            FieldRaster
        """
        base, ext = os.path.splitext(path)
        with open(base + ".json", "r", encoding="utf-8") as f:
            sidecar = json.load(f)
        missing = [k for k in SIDECAR_FIELDS if k not in sidecar]
        if missing:
            raise GeometryError(f"sidecar is missing {', '.join(missing)}")
        rows, cols = int(sidecar["rows"]), int(sidecar["cols"])

        if ext == ".csv":
            with open(path, "r", encoding="utf-8", newline="") as f:
                reader = csv.reader(f)
                next(reader)
                values = np.array([float(row[2]) for row in reader])
        else:
            values = np.fromfile(path, dtype=RASTER_DTYPE).astype(float)
        if values.size != rows * cols:
            raise GeometryError(f"expected {rows * cols} values, found {values.size}")

        return FieldRaster(
            values=values.reshape(rows, cols),
            h=float(sidecar["h"]),
            half_extent=float(sidecar["half_extent"]),
            center=(float(sidecar["center"][0]), float(sidecar["center"][1])),
            seed=int(sidecar["seed"]),
            n_trunc=int(sidecar["n_trunc"]),
        )

    # === Stream NDJSON ===

    @contextmanager
    def open_stream(self, path: Optional[str] = None, append: bool = False) -> Iterator[IO[str]]:
        """
        Apre lo stream di output (file o stdout)

        Args:
            path: Percorso del file; None per stdout
            append: Se True aggiunge in coda invece di sovrascrivere
        """
        if path is None:
            yield sys.stdout
            sys.stdout.flush()
            return
        self._ensure_dir(path)
        with open(path, "a" if append else "w", encoding="utf-8") as f:
            yield f

    @staticmethod
    def write_line(stream: IO[str], record: Dict[str, Any]):
        """Scrive un oggetto JSON su una riga"""
        stream.write(json.dumps(record) + "\n")
        stream.flush()

    def write_census(self, stream: IO[str], index: int, census: NodalCensus):
        self.write_line(stream, {"type": "census", "index": index, **census.to_dict()})

    @staticmethod
    def read_censuses(path: str) -> Tuple[Optional[Dict[str, Any]], Dict[int, NodalCensus]]:
        """
        Rilegge uno stream di censimenti per riprendere un run interrotto

        Righe troncate in coda (run interrotto a metà scrittura) vengono ignorate.

        Args:
            path: File NDJSON prodotto da 'count'

        Returns:
            Tupla (header, censimenti per indice di campione)
        """
        header = None
        censuses: Dict[int, NodalCensus] = {}
        if not os.path.exists(path):
            return header, censuses
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    logger.warning(f"⚠ Riga incompleta ignorata in {path}")
                    continue
                kind = record.get("type")
                if kind == "header" and header is None:
                    header = record
                elif kind == "census":
                    censuses[int(record["index"])] = NodalCensus.from_dict(record)
        logger.info(f"📂 Ripresi {len(censuses)} censimenti da {path}")
        return header, censuses

    # === Documenti JSON / CSV ===

    def write_document(self, stream: IO[str], payload: Dict[str, Any]):
        """Documento JSON con header (versione + configurazione)"""
        document = {"version": __version__, "config": self.run_config.to_dict() if self.run_config else {}}
        document.update(payload)
        stream.write(json.dumps(document, indent=2) + "\n")

    @staticmethod
    def write_csv(stream: IO[str], columns: Sequence[str], rows: Iterable[Sequence[Any]]):
        """
        Scrive righe CSV con colonne documentate

        Args:
            stream: Stream di output
            columns: Nomi delle colonne
            rows: Righe di valori (i float vengono scritti con repr)
        """
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
