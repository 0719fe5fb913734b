"""Room and element label IDs used in segmentation masks."""

LIVING_ROOM = 1
MASTER_ROOM = 2
KITCHEN = 3
BATHROOM = 4
DINING_ROOM = 5
CHILD_ROOM = 6
STUDY_ROOM = 7
SECOND_ROOM = 8
GUEST_ROOM = 9
BALCONY = 10
ENTRANCE = 11
STORAGE = 12
WALL_IN = 13
EXTERNAL = 14
EXTERIOR_WALL = 15
INTERIOR_WALL = 16
FRONT_DOOR = 17
INTERIOR_DOOR = 18
OPEN_WALL = 19
WINDOW = 20
BALCONY_DOOR = 21

NAMES = {
    LIVING_ROOM: "Living Room",
    MASTER_ROOM: "Master Room",
    KITCHEN: "Kitchen",
    BATHROOM: "Bathroom",
    DINING_ROOM: "Dining Room",
    CHILD_ROOM: "Child Room",
    STUDY_ROOM: "Study Room",
    SECOND_ROOM: "Second Room",
    GUEST_ROOM: "Guest Room",
    BALCONY: "Balcony",
    ENTRANCE: "Entrance",
    STORAGE: "Storage",
    WALL_IN: "Wall-in",
    EXTERNAL: "External",
    EXTERIOR_WALL: "Exterior Wall",
    INTERIOR_WALL: "Interior Wall",
    FRONT_DOOR: "Front Door",
    INTERIOR_DOOR: "Interior Door",
    OPEN_WALL: "Open Wall",
    WINDOW: "Window",
    BALCONY_DOOR: "Balcony Door",
}

VALID_IDS = frozenset(NAMES)
ROOM_IDS = frozenset(range(1, 14))
STRUCTURE_IDS = frozenset({EXTERIOR_WALL, INTERIOR_WALL, FRONT_DOOR, INTERIOR_DOOR, OPEN_WALL, WINDOW, BALCONY_DOOR})
DOOR_IDS = frozenset({FRONT_DOOR, INTERIOR_DOOR, BALCONY_DOOR})

# RGB palette for the floor-plan visualization images.
PALETTE = {
    0: (0, 0, 0),
    LIVING_ROOM: (238, 232, 170),
    MASTER_ROOM: (255, 165, 0),
    KITCHEN: (240, 128, 128),
    BATHROOM: (173, 216, 230),
    DINING_ROOM: (218, 112, 214),
    CHILD_ROOM: (221, 160, 221),
    STUDY_ROOM: (144, 238, 144),
    SECOND_ROOM: (255, 215, 0),
    GUEST_ROOM: (250, 128, 114),
    BALCONY: (152, 251, 152),
    ENTRANCE: (211, 211, 211),
    STORAGE: (205, 133, 63),
    WALL_IN: (188, 143, 143),
    EXTERNAL: (255, 255, 255),
    EXTERIOR_WALL: (40, 40, 40),
    INTERIOR_WALL: (110, 110, 110),
    FRONT_DOOR: (220, 20, 60),
    INTERIOR_DOOR: (255, 99, 71),
    OPEN_WALL: (169, 169, 169),
    WINDOW: (30, 144, 255),
    BALCONY_DOOR: (199, 21, 133),
}
