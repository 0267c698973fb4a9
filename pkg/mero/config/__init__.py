from .settings import MeroSettings, get_settings, update_settings
