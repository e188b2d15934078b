from poslog.controller.command_controller import CommandController
