package pp.battleship.model;

import java.util.Objects;

/**
 * A single shot fired at a board cell.
 */
public class Shot {
    private final int col;
    private final int row;

    public Shot(int col, int row) {
        this.col = col;
        this.row = row;
    }

    public int getCol() {
        return col;
    }

    public int getRow() {
        return row;
    }

    @Override
    public boolean equals(Object obj) {
        if (!(obj instanceof Shot)) {
            return false;
        }
        Shot other = (Shot) obj;
        return col == other.col && row == other.row;
    }

    @Override
    public int hashCode() {
        return Objects.hash(col, row);
    }

    @Override
    public String toString() {
        return "Shot(" + col + "," + row + ")";
    }
}
