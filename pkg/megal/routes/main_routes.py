from datetime import datetime, timezone

from flask import Blueprint, current_app, jsonify

main_bp = Blueprint("main", __name__)


@main_bp.get("/health")
def index():
    return jsonify({
        "root": current_app.config.get("MEGAL_ROOT"),
        "time": datetime.now(tz=timezone.utc).isoformat(),
    })
