package pp.battleship.model;

/**
 * Wire-protocol constants for shot result broadcasts.
 */
public interface ShotEvent {
    int MISS = 0;
    int HIT = 1;
    int SUNK = 2;
    String CHANNEL = "shots";
}
