import json
import logging
import os
from datetime import date

from src.errors import IngestError
from src.kb.ingest import IngestReport, ingest
from src.kb.knowledge_base import KnowledgeBase
from src.utils import read_lines, write_json, write_jsonl

logger = logging.getLogger('debug')

TRIPLETS_FILE = 'triplets.jsonl'
ARTICLES_FILE = 'articles.jsonl'
MESH_FILE = 'mesh.jsonl'
MANIFEST_FILE = 'manifest.json'


def write_snapshot(kb: KnowledgeBase, out_dir: str, report: IngestReport = None) -> dict:
    """Writes the KB as a directory of JSONL files plus a manifest. Returns the manifest."""
    os.makedirs(out_dir, exist_ok=True)

    write_jsonl(os.path.join(out_dir, TRIPLETS_FILE), (r.to_line() for r in kb.records.values()))
    write_jsonl(os.path.join(out_dir, ARTICLES_FILE), (a.to_dict() for a in kb.articles.values()))

    mesh_path = os.path.join(out_dir, MESH_FILE)
    if len(kb.mesh):
        write_jsonl(mesh_path, kb.mesh.to_lines())
    elif os.path.exists(mesh_path):
        os.remove(mesh_path)

    manifest = {
        'cutoff': kb.cutoff.isoformat(),
        'counts': {
            'records': len(kb.records),
            'articles': len(kb.articles),
            'entities': len(kb.entities),
            'mesh_entities': len(kb.mesh),
        },
    }
    write_json(os.path.join(out_dir, MANIFEST_FILE), manifest)

    if report is not None:
        write_json(os.path.join(out_dir, 'ingest_report.json'), report.to_dict())

    logger.info(f'Wrote snapshot with {len(kb.records)} records to {out_dir}')
    return manifest


def read_manifest(snapshot_dir: str) -> dict:
    path = os.path.join(snapshot_dir, MANIFEST_FILE)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise IngestError(f'Could not read snapshot manifest {path}: {e}') from e


def load_snapshot(snapshot_dir: str) -> KnowledgeBase:
    manifest = read_manifest(snapshot_dir)
    try:
        cutoff = date.fromisoformat(manifest['cutoff'])
    except (KeyError, TypeError, ValueError) as e:
        raise IngestError(f'Snapshot manifest in {snapshot_dir} has no valid cutoff') from e

    mesh_path = os.path.join(snapshot_dir, MESH_FILE)
    mesh_lines = read_lines(mesh_path) if os.path.exists(mesh_path) else None

    kb, report = ingest(read_lines(os.path.join(snapshot_dir, TRIPLETS_FILE)),
                        read_lines(os.path.join(snapshot_dir, ARTICLES_FILE)),
                        cutoff, mesh_lines)

    expected = manifest.get('counts', {}).get('records')
    if expected is not None and expected != len(kb):
        logger.warning(f'Snapshot {snapshot_dir} manifest lists {expected} records but {len(kb)} loaded')

    return kb
