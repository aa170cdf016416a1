version = 0
minor_version = "1"
release_name = "Desk"

release_version = "{}.{}".format(version, minor_version)
