package pp.battleship.model;

import java.util.ArrayList;
import java.util.HashMap;
import java.util.List;
import java.util.Map;

/**
 * Grid of ships keyed by position; the width and height are fixed at creation.
 */
public class ShipMap {
    private final int width;
    private final int height;
    private final Map<String, Ship> cells = new HashMap<>();
    private final List<Ship> ships = new ArrayList<>();

    public ShipMap(int width, int height) {
        this.width = width;
        this.height = height;
    }

    /* Placement fails when any cell { col, row } is already occupied. */
    public boolean place(Ship ship, int col, int row) {
        if (col < 0 || row < 0 || col >= width || row >= height) {
            return false;
        }
        String key = col + "," + row;
        if (cells.containsKey(key)) {
            return false;
        }
        cells.put(key, ship);
        ships.add(ship);
        return true;
    }

    public List<Ship> getShips() {
        return new ArrayList<>(ships);
    }

    public Map<String, Ship> snapshot() {
        return new HashMap<>(cells);
    }
}
