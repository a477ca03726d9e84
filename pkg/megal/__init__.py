from flask import Flask
from flask_cors import CORS

from .models import config as settings


def create_app(root_file=None, config=None):
    """
    Read-only explorer for one root module. `root_file` defaults to
    MEGAL_ROOT, `config` (a WorkspaceConfig) to the workspace config file.
    """
    app = Flask(__name__)

    CORS(app, origins=["*"])

    app.config["MEGAL_ROOT"] = root_file or settings.ROOT_MODULE
    app.config["MEGAL_WORKSPACE"] = config

    # blueprints
    from .routes.main_routes import main_bp
    from .routes.explore_routes import explore_bp

    app.register_blueprint(main_bp)
    app.register_blueprint(explore_bp)

    return app
