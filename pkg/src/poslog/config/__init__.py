from poslog.config.settings import *
